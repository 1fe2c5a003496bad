use super::{ParamStore, Real};

/// Adam moments and hyperparameters. Moment buffers are created lazily on
/// the first step.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(lr: f64, beta1: f64, beta2: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

/// Bias-corrected Adam update of every trainable parameter, then zeroes
/// all gradients.
pub fn adam_step<T: Real>(params: &mut ParamStore<T>, state: &mut AdamState<T>) {
    if state.m.len() != params.len() {
        state.m = params.iter().map(|p| vec![T::zero(); p.grad.len()]).collect();
        state.v = state.m.clone();
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    let (tb1, tb2) = (T::of(b1), T::of(b2));
    let (ob1, ob2) = (T::of(1.0 - b1), T::of(1.0 - b2));
    let step = T::of(state.lr / c1);
    let inv_c2 = T::of(1.0 / c2);
    let eps = T::of(state.eps);
    for (k, p) in params.iter_mut().enumerate() {
        if p.trainable {
            let (m, v) = (&mut state.m[k], &mut state.v[k]);
            for (((w, &g), m), v) in p.value.data_mut().iter_mut().zip(&p.grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = tb1 * *m + ob1 * g;
                *v = tb2 * *v + ob2 * g * g;
                *w -= step * *m / ((*v * inv_c2).sqrt() + eps);
            }
        }
        p.grad.iter_mut().for_each(|g| *g = T::zero());
    }
}

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm<T: Real>(params: &mut ParamStore<T>, max_norm: f64) -> f64 {
    let norm = params.grad_norm().as_f64();
    if norm > max_norm && norm > 0.0 {
        let s = T::of(max_norm / norm);
        for p in params.iter_mut() {
            p.grad.iter_mut().for_each(|g| *g *= s);
        }
    }
    norm
}

/// Reduce-on-plateau learning-rate schedule in maximize mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
    pub best: f64,
    pub epochs_since_best: usize,
    pub lr: f64,
}

impl PlateauScheduler {
    pub fn new(lr: f64, factor: f64, patience: usize, min_lr: f64) -> Self {
        Self {
            factor,
            patience,
            min_lr,
            best: f64::NEG_INFINITY,
            epochs_since_best: 0,
            lr,
        }
    }

    /// Records one epoch's dev metric and returns the learning rate to use
    /// next. A reduction never raises the rate, even when `min_lr` is above
    /// the current value.
    pub fn step(&mut self, metric: f64) -> f64 {
        if metric > self.best {
            self.best = metric;
            self.epochs_since_best = 0;
        } else {
            self.epochs_since_best += 1;
        }
        if self.epochs_since_best > self.patience {
            let reduced = (self.lr * self.factor).max(self.min_lr);
            if reduced < self.lr {
                self.lr = reduced;
            }
            self.epochs_since_best = 0;
        }
        self.lr
    }
}

pub fn plateau_step(s: &mut PlateauScheduler, dev_metric: f64) -> f64 {
    s.step(dev_metric)
}

/// Linear warmup followed by inverse square-root decay, indexed by the
/// number of training samples seen.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmupInvSqrt {
    pub base_lr: f64,
    pub warmup_samples: u64,
}

impl WarmupInvSqrt {
    pub fn lr_at(&self, samples_seen: u64) -> f64 {
        if self.warmup_samples == 0 {
            return self.base_lr;
        }
        let s = samples_seen.max(1) as f64;
        let w = self.warmup_samples as f64;
        if s < w {
            self.base_lr * s / w
        } else {
            self.base_lr * (w / s).sqrt()
        }
    }
}
