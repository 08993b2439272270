//! The elementary stochastic process for one eigenstate intensity.
//!
//! The intensity is quantized as `A = a/N`. At every tick the lattice value `a`
//! either stays, or moves by ±1 with equal probability `p(a)(1 − p(a))`, where
//! `p` is a [`TransitionModel`]. The values `0` and `N` are absorbing.

mod walk;

use std::fmt;

use rand::Rng;

use crate::{Error, Result};

pub use walk::{
    run_walk, run_walk_stepwise, Budget, BudgetMode, StopReason, WalkOptions, WalkRecord,
    DEFAULT_CEILING,
};

/// Quantized intensity `a` on the lattice `{0, …, N}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeState {
    a: u64,
    lattice: u64,
}

impl LatticeState {
    pub fn new(a: u64, lattice: u64) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::out_of_range("N", 0.0, "[1, ∞)"));
        }
        if a > lattice {
            return Err(Error::out_of_range("a", a as f64, "[0, N]"));
        }
        Ok(LatticeState { a, lattice })
    }

    #[inline]
    pub fn a(&self) -> u64 {
        self.a
    }

    /// `N = 1/ε`.
    #[inline]
    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    /// `ε = 1/N`.
    #[inline]
    pub fn resolution(&self) -> f64 {
        1.0 / self.lattice as f64
    }

    /// `A = aε`.
    #[inline]
    pub fn intensity(&self) -> f64 {
        self.a as f64 / self.lattice as f64
    }

    /// True at either stopping value, `a = 0` or `a = N`.
    #[inline]
    pub fn is_absorbed(&self) -> bool {
        self.a == 0 || self.a == self.lattice
    }
}

/// The donation probability `p(a)` driving the walk.
///
/// Implementations must satisfy `p(0) = 0` and `0 < p(a) ≤ 1` for `a ∈ [1, N]`.
/// [`Tabulated`] checks this on construction; other implementations are trusted.
pub trait TransitionModel: Send + Sync + fmt::Debug {
    fn lattice(&self) -> u64;

    fn donation_prob(&self, a: u64) -> f64;
}

/// The canonical model `p(a) = aε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Canonical {
    lattice: u64,
}

impl Canonical {
    pub fn new(lattice: u64) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::out_of_range("N", 0.0, "[1, ∞)"));
        }
        Ok(Canonical { lattice })
    }
}

impl TransitionModel for Canonical {
    fn lattice(&self) -> u64 {
        self.lattice
    }

    #[inline]
    fn donation_prob(&self, a: u64) -> f64 {
        a as f64 / self.lattice as f64
    }
}

/// A model given by an explicit table `p(0), …, p(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    probs: Vec<f64>,
}

impl Tabulated {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Config("a transition table needs entries for a = 0..=N with N ≥ 1".into()));
        }
        if probs[0] != 0.0 {
            return Err(Error::out_of_range("p(0)", probs[0], "{0}"));
        }
        for &p in &probs[1..] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::out_of_range("p(a)", p, "(0, 1] for a ≥ 1"));
            }
        }
        Ok(Tabulated { probs })
    }

    pub fn from_fn(lattice: u64, f: impl Fn(u64) -> f64) -> Result<Self> {
        Self::new((0..=lattice).map(f).collect())
    }
}

impl TransitionModel for Tabulated {
    fn lattice(&self) -> u64 {
        self.probs.len() as u64 - 1
    }

    #[inline]
    fn donation_prob(&self, a: u64) -> f64 {
        self.probs[a as usize]
    }
}

/// Per-tick probabilities of the three possible outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionProbs {
    pub up: f64,
    pub down: f64,
    pub stay: f64,
}

/// Outcome probabilities of one elementary tick at lattice value `a`.
///
/// Away from the endpoints `up = down = p(1 − p)` and `stay = p² + (1 − p)²`.
/// At `a = 0` and `a = N` the stopping rule forces `stay = 1` whatever the model
/// says.
pub fn transition_probs<M: TransitionModel + ?Sized>(a: u64, model: &M) -> Result<TransitionProbs> {
    let lattice = model.lattice();
    if a > lattice {
        return Err(Error::out_of_range("a", a as f64, "[0, N]"));
    }
    if a == 0 || a == lattice {
        return Ok(TransitionProbs {
            up: 0.0,
            down: 0.0,
            stay: 1.0,
        });
    }
    let p = model.donation_prob(a);
    let change = p * (1.0 - p);
    Ok(TransitionProbs {
        up: change,
        down: change,
        stay: p * p + (1.0 - p) * (1.0 - p),
    })
}

/// Advances the state by one elementary tick.
pub fn step_elementary<M, R>(state: LatticeState, model: &M, rng: &mut R) -> LatticeState
where
    M: TransitionModel + ?Sized,
    R: Rng + ?Sized,
{
    if state.is_absorbed() {
        return state;
    }
    debug_assert_eq!(state.lattice, model.lattice());
    let p = model.donation_prob(state.a);
    let change = p * (1.0 - p);
    let u: f64 = rng.random();
    let a = if u < change {
        state.a + 1
    } else if u < 2.0 * change {
        state.a - 1
    } else {
        state.a
    };
    LatticeState { a, ..state }
}
