/// Per-tensor RMSprop state.
#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    pub cache: Vec<f64>,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl RmspropState {
    pub const DEFAULT_LR: f64 = 1e-3;
    pub const DEFAULT_RHO: f64 = 0.9;
    pub const DEFAULT_EPS: f64 = 1e-8;

    pub fn new(len: usize, lr: f64, rho: f64, eps: f64) -> Self {
        RmspropState {
            cache: vec![0.0; len],
            lr,
            rho,
            eps,
        }
    }

    pub fn with_defaults(len: usize) -> Self {
        Self::new(len, Self::DEFAULT_LR, Self::DEFAULT_RHO, Self::DEFAULT_EPS)
    }
}

/// `cache = rho cache + (1 - rho) g^2; param -= lr g / (sqrt(cache) + eps)`.
pub fn rmsprop_step(param: &mut [f64], grad: &[f64], state: &mut RmspropState) {
    assert_eq!(param.len(), grad.len(), "parameter/gradient length");
    assert_eq!(param.len(), state.cache.len(), "parameter/cache length");
    let (lr, rho, eps) = (state.lr, state.rho, state.eps);
    for ((p, &g), c) in param.iter_mut().zip(grad).zip(state.cache.iter_mut()) {
        *c = rho * *c + (1.0 - rho) * g * g;
        *p -= lr * g / (c.sqrt() + eps);
    }
}

/// RMSprop over an ordered list of tensors.
#[derive(Debug, Clone)]
pub struct Rmsprop {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    states: Vec<RmspropState>,
}

impl Rmsprop {
    pub fn new(lr: f64, rho: f64, eps: f64) -> Self {
        Rmsprop {
            lr,
            rho,
            eps,
            states: Vec::new(),
        }
    }

    /// Applies one update; state is created lazily on the first call.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>) {
        assert_eq!(params.len(), grads.len(), "tensor count");
        if self.states.is_empty() {
            self.states = params
                .iter()
                .map(|p| RmspropState::new(p.len(), self.lr, self.rho, self.eps))
                .collect();
        }
        for ((p, g), s) in params.into_iter().zip(grads).zip(self.states.iter_mut()) {
            s.lr = self.lr;
            rmsprop_step(p, g, s);
        }
    }
}

impl Default for Rmsprop {
    fn default() -> Self {
        Self::new(
            RmspropState::DEFAULT_LR,
            RmspropState::DEFAULT_RHO,
            RmspropState::DEFAULT_EPS,
        )
    }
}
