//! Parameter tensors of the LSTM → Dense → ReLU → BatchNorm → Dense → sigmoid model.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Floating-point type the network runs in.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Default + Debug + Send + Sync + 'static {}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal fits the scalar type")
}

/// Accelerometer axes per time step.
pub const INPUT_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    /// LSTM units.
    pub hidden: usize,
    /// Units of the first dense layer (and of the batch-norm layer).
    pub dense: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self { hidden: 128, dense: 128 }
    }
}

pub const PARAM_NAMES: [&str; 9] = [
    "lstm.input_weight",
    "lstm.recurrent_weight",
    "lstm.bias",
    "dense1.weight",
    "dense1.bias",
    "batchnorm.gamma",
    "batchnorm.beta",
    "dense2.weight",
    "dense2.bias",
];

/// The trainable tensors. Also used for gradients and optimizer moments.
///
/// LSTM gate blocks are stacked in the order input, forget, cell, output;
/// matrices are row-major with one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<T> {
    /// `4H × 3`
    pub w_ih: Vec<T>,
    /// `4H × H`
    pub w_hh: Vec<T>,
    /// `4H`
    pub b_lstm: Vec<T>,
    /// `D × H`
    pub w1: Vec<T>,
    /// `D`
    pub b1: Vec<T>,
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
    /// `D`
    pub w2: Vec<T>,
    /// `1`
    pub b2: Vec<T>,
}

impl<T: Scalar> ParamSet<T> {
    pub fn zeros(arch: Architecture) -> Self {
        let (h, d) = (arch.hidden, arch.dense);
        let z = |n: usize| vec![T::zero(); n];
        Self {
            w_ih: z(4 * h * INPUT_SIZE),
            w_hh: z(4 * h * h),
            b_lstm: z(4 * h),
            w1: z(d * h),
            b1: z(d),
            gamma: z(d),
            beta: z(d),
            w2: z(d),
            b2: z(1),
        }
    }

    pub fn tensors(&self) -> [&Vec<T>; 9] {
        [&self.w_ih, &self.w_hh, &self.b_lstm, &self.w1, &self.b1, &self.gamma, &self.beta, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<T>; 9] {
        [
            &mut self.w_ih,
            &mut self.w_hh,
            &mut self.b_lstm,
            &mut self.w1,
            &mut self.b1,
            &mut self.gamma,
            &mut self.beta,
            &mut self.w2,
            &mut self.b2,
        ]
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add_assign(&mut self, other: &ParamSet<T>) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn cast<U: Scalar>(&self) -> ParamSet<U> {
        let c = |v: &Vec<T>| v.iter().map(|x| U::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan())).collect();
        ParamSet {
            w_ih: c(&self.w_ih),
            w_hh: c(&self.w_hh),
            b_lstm: c(&self.b_lstm),
            w1: c(&self.w1),
            b1: c(&self.b1),
            gamma: c(&self.gamma),
            beta: c(&self.beta),
            w2: c(&self.w2),
            b2: c(&self.b2),
        }
    }
}

/// Trainable weights plus the batch-norm running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub arch: Architecture,
    pub weights: ParamSet<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
}

pub type Model = ModelParams<f32>;

impl<T: Scalar> ModelParams<T> {
    /// Uniform(±1/√fan_in) weights, zero biases except a forget-gate bias of 1,
    /// batch-norm γ = 1, β = 0, running mean 0 and variance 1.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, d) = (arch.hidden, arch.dense);
        let mut w = ParamSet::zeros(arch);
        let mut fill = |t: &mut Vec<T>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in t.iter_mut() {
                *v = lit(rng.gen_range(-bound..=bound));
            }
        };
        fill(&mut w.w_ih, INPUT_SIZE);
        fill(&mut w.w_hh, h);
        fill(&mut w.w1, h);
        fill(&mut w.w2, d);
        for b in &mut w.b_lstm[h..2 * h] {
            *b = T::one();
        }
        w.gamma.fill(T::one());
        Self { arch, weights: w, running_mean: vec![T::zero(); d], running_var: vec![T::one(); d] }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.all_finite()
            && self.running_mean.iter().all(|v| v.is_finite())
            && self.running_var.iter().all(|v| v.is_finite() && *v >= T::zero())
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        let c = |v: &Vec<T>| v.iter().map(|x| U::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan())).collect();
        ModelParams {
            arch: self.arch,
            weights: self.weights.cast(),
            running_mean: c(&self.running_mean),
            running_var: c(&self.running_var),
        }
    }
}

/// Same as [`ModelParams::init`] at the default 128/128 size in f32.
pub fn init_model(seed: u64) -> Model {
    ModelParams::init(Architecture::default(), seed)
}
