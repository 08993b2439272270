use std::fmt;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::TransitionModel;
use crate::{Error, Result};

/// Safety ceiling for walks with an [`Budget::Unlimited`] budget.
pub const DEFAULT_CEILING: u64 = 1_000_000_000;

/// Blocks up to this many moves are drawn as raw bits; longer blocks use a
/// binomial sampler.
const BITWISE_BLOCK_LIMIT: u64 = 1024;

/// What one unit of walk budget counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetMode {
    /// Elementary ticks of the lazy process, including ticks where `a` stays.
    Ticks,
    /// Actual ±1 moves. The spread after `n` moves is `ε√n`.
    #[default]
    Moves,
}

impl fmt::Display for BudgetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BudgetMode::Ticks => "ticks",
            BudgetMode::Moves => "moves",
        })
    }
}

/// Number of interactions a target has with the absorber.
///
/// Serialized as a plain integer or the string `"unlimited"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Budget {
    Limited(u64),
    /// Run until absorption, subject to [`WalkOptions::ceiling`].
    Unlimited,
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Limited(n) => write!(f, "{n}"),
            Budget::Unlimited => f.write_str("unlimited"),
        }
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Budget::Limited(n) => s.serialize_u64(*n),
            Budget::Unlimited => s.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct BudgetVisitor;

        impl de::Visitor<'_> for BudgetVisitor {
            type Value = Budget;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"unlimited\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Budget, E> {
                Ok(Budget::Limited(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Budget, E> {
                u64::try_from(v)
                    .map(Budget::Limited)
                    .map_err(|_| E::invalid_value(de::Unexpected::Signed(v), &self))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Budget, E> {
                v.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }

        d.deserialize_any(BudgetVisitor)
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("unlimited") || s.eq_ignore_ascii_case("inf") {
            return Ok(Budget::Unlimited);
        }
        s.parse()
            .map(Budget::Limited)
            .map_err(|_| Error::Config(format!("budget {s:?} is neither an integer nor \"unlimited\"")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalkOptions {
    pub budget: Budget,
    pub mode: BudgetMode,
    /// Hard stop for unlimited walks, in units of `mode`.
    pub ceiling: u64,
}

impl WalkOptions {
    pub fn new(budget: Budget, mode: BudgetMode) -> Self {
        WalkOptions {
            budget,
            mode,
            ceiling: DEFAULT_CEILING,
        }
    }

    pub fn with_ceiling(self, ceiling: u64) -> Self {
        WalkOptions { ceiling, ..self }
    }

    fn limit(&self) -> u64 {
        match self.budget {
            Budget::Limited(n) => n,
            Budget::Unlimited => self.ceiling,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StopReason {
    AbsorbedAtZero,
    AbsorbedAtN,
    BudgetExhausted,
}

/// One trajectory of the walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub final_a: u64,
    pub moves_taken: u64,
    /// Elementary ticks consumed. Only tracked in [`BudgetMode::Ticks`].
    pub ticks_taken: Option<u64>,
    pub stop_reason: StopReason,
    /// First hitting time of `{0, N}` in units of the budget mode.
    pub stopping_time: Option<u64>,
}

impl WalkRecord {
    pub fn is_absorbed(&self) -> bool {
        self.stop_reason != StopReason::BudgetExhausted
    }
}

fn absorbed_record(a: u64, lattice: u64, moves: u64, ticks: Option<u64>, time: u64) -> Option<WalkRecord> {
    let stop_reason = if a == 0 {
        StopReason::AbsorbedAtZero
    } else if a == lattice {
        StopReason::AbsorbedAtN
    } else {
        return None;
    };
    Some(WalkRecord {
        final_a: a,
        moves_taken: moves,
        ticks_taken: ticks,
        stop_reason,
        stopping_time: Some(time),
    })
}

fn exhausted(a0: u64, a: u64, moves: u64, ticks: Option<u64>, opts: &WalkOptions) -> Result<WalkRecord> {
    match opts.budget {
        Budget::Limited(_) => Ok(WalkRecord {
            final_a: a,
            moves_taken: moves,
            ticks_taken: ticks,
            stop_reason: StopReason::BudgetExhausted,
            stopping_time: None,
        }),
        Budget::Unlimited => Err(Error::CeilingReached {
            a0,
            ceiling: opts.ceiling,
            unit: match opts.mode {
                BudgetMode::Ticks => "ticks",
                BudgetMode::Moves => "moves",
            },
        }),
    }
}

/// Runs one trajectory from `a0` until it is absorbed at `0`/`N` or the budget
/// runs out.
///
/// In [`BudgetMode::Moves`] only the ±1 moves are simulated; conditional on a
/// move, up and down are equally likely for every model, so the model does not
/// enter. Runs of moves that cannot reach either endpoint are drawn as a single
/// block, which makes unlimited walks cheap even for large `N`.
///
/// In [`BudgetMode::Ticks`] the waiting time before each move is drawn from the
/// geometric law with success probability `2p(a)(1 − p(a))`.
pub fn run_walk<M, R>(a0: u64, model: &M, opts: &WalkOptions, rng: &mut R) -> Result<WalkRecord>
where
    M: TransitionModel + ?Sized,
    R: Rng + ?Sized,
{
    let lattice = model.lattice();
    if a0 > lattice {
        return Err(Error::out_of_range("a0", a0 as f64, "[0, N]"));
    }
    match opts.mode {
        BudgetMode::Moves => walk_moves_blocked(a0, lattice, opts, rng),
        BudgetMode::Ticks => walk_ticks(a0, model, opts, rng),
    }
}

/// Same law as [`run_walk`], drawing every move (and in tick mode every tick)
/// individually. Slow; kept as a reference for the block sampler.
pub fn run_walk_stepwise<M, R>(a0: u64, model: &M, opts: &WalkOptions, rng: &mut R) -> Result<WalkRecord>
where
    M: TransitionModel + ?Sized,
    R: Rng + ?Sized,
{
    let lattice = model.lattice();
    if a0 > lattice {
        return Err(Error::out_of_range("a0", a0 as f64, "[0, N]"));
    }
    let limit = opts.limit();
    let mut state = super::LatticeState::new(a0, lattice)?;
    let (mut moves, mut ticks) = (0u64, 0u64);
    let count_ticks = opts.mode == BudgetMode::Ticks;
    loop {
        let used = if count_ticks { ticks } else { moves };
        let ticks_out = count_ticks.then_some(ticks);
        if let Some(rec) = absorbed_record(state.a(), lattice, moves, ticks_out, used) {
            return Ok(rec);
        }
        if used >= limit {
            return exhausted(a0, state.a(), moves, ticks_out, opts);
        }
        if count_ticks {
            let next = super::step_elementary(state, model, rng);
            ticks += 1;
            if next.a() != state.a() {
                moves += 1;
            }
            state = next;
        } else {
            let a = if rng.random::<bool>() { state.a() + 1 } else { state.a() - 1 };
            state = super::LatticeState::new(a, lattice)?;
            moves += 1;
        }
    }
}

fn walk_moves_blocked<R: Rng + ?Sized>(a0: u64, lattice: u64, opts: &WalkOptions, rng: &mut R) -> Result<WalkRecord> {
    let limit = opts.limit();
    let mut a = a0;
    let mut moves = 0u64;
    loop {
        if let Some(rec) = absorbed_record(a, lattice, moves, None, moves) {
            return Ok(rec);
        }
        let remaining = limit - moves;
        if remaining == 0 {
            return exhausted(a0, a, moves, None, opts);
        }
        // k < distance to the nearest endpoint, so no path inside the block can touch it.
        let distance = a.min(lattice - a);
        let block = if distance > 1 { (distance - 1).min(remaining) } else { 1 };
        let ups = count_up_moves(block, rng);
        a = a + 2 * ups - block;
        moves += block;
    }
}

/// Number of up moves among `block` fair ±1 moves, i.e. a Binomial(block, ½) draw.
fn count_up_moves<R: Rng + ?Sized>(block: u64, rng: &mut R) -> u64 {
    if block > BITWISE_BLOCK_LIMIT {
        return Binomial::new(block, 0.5)
            .expect("p = 1/2 is a valid binomial parameter")
            .sample(rng);
    }
    let mut ups = 0u64;
    let mut left = block;
    while left >= 64 {
        ups += u64::from(rng.next_u64().count_ones());
        left -= 64;
    }
    if left > 0 {
        let mask = (1u64 << left) - 1;
        ups += u64::from((rng.next_u64() & mask).count_ones());
    }
    ups
}

fn walk_ticks<M, R>(a0: u64, model: &M, opts: &WalkOptions, rng: &mut R) -> Result<WalkRecord>
where
    M: TransitionModel + ?Sized,
    R: Rng + ?Sized,
{
    let lattice = model.lattice();
    let limit = opts.limit();
    let mut a = a0;
    let (mut moves, mut ticks) = (0u64, 0u64);
    loop {
        if let Some(rec) = absorbed_record(a, lattice, moves, Some(ticks), ticks) {
            return Ok(rec);
        }
        let remaining = limit - ticks;
        if remaining == 0 {
            return exhausted(a0, a, moves, Some(ticks), opts);
        }
        let p = model.donation_prob(a);
        let move_prob = 2.0 * p * (1.0 - p);
        // Ticks up to and including the next move.
        let wait = if move_prob > 0.0 {
            Geometric::new(move_prob)
                .expect("move probability lies in (0, 1]")
                .sample(rng)
                .saturating_add(1)
        } else {
            u64::MAX
        };
        if wait > remaining {
            ticks = limit;
            return exhausted(a0, a, moves, Some(ticks), opts);
        }
        ticks += wait;
        moves += 1;
        a = if rng.random::<bool>() { a + 1 } else { a - 1 };
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Canonical, Tabulated};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn start_at_zero_is_immediately_absorbed() {
        let m = Canonical::new(100).unwrap();
        for mode in [BudgetMode::Moves, BudgetMode::Ticks] {
            for budget in [Budget::Limited(0), Budget::Limited(50), Budget::Unlimited] {
                let rec = run_walk(0, &m, &WalkOptions::new(budget, mode), &mut rng(1)).unwrap();
                assert_eq!(rec.final_a, 0);
                assert_eq!(rec.stop_reason, StopReason::AbsorbedAtZero);
                assert_eq!(rec.stopping_time, Some(0));
            }
        }
        let rec = run_walk(100, &m, &WalkOptions::new(Budget::Limited(0), BudgetMode::Moves), &mut rng(1)).unwrap();
        assert_eq!(rec.stop_reason, StopReason::AbsorbedAtN);
    }

    #[test]
    fn zero_budget_leaves_a0() {
        let m = Canonical::new(100).unwrap();
        for mode in [BudgetMode::Moves, BudgetMode::Ticks] {
            let rec = run_walk(37, &m, &WalkOptions::new(Budget::Limited(0), mode), &mut rng(2)).unwrap();
            assert_eq!(rec.final_a, 37);
            assert_eq!(rec.moves_taken, 0);
            assert_eq!(rec.stop_reason, StopReason::BudgetExhausted);
            assert_eq!(rec.stopping_time, None);
        }
    }

    #[test]
    fn a0_beyond_lattice_is_a_domain_error() {
        let m = Canonical::new(10).unwrap();
        let opts = WalkOptions::new(Budget::Limited(5), BudgetMode::Moves);
        assert!(matches!(run_walk(11, &m, &opts, &mut rng(0)), Err(Error::OutOfRange { .. })));
        assert!(run_walk_stepwise(11, &m, &opts, &mut rng(0)).is_err());
    }

    #[test]
    fn limited_moves_budget_is_spent_exactly() {
        let m = Canonical::new(10_000).unwrap();
        let opts = WalkOptions::new(Budget::Limited(3_333), BudgetMode::Moves);
        let mut r = rng(3);
        for _ in 0..100 {
            let rec = run_walk(5_000, &m, &opts, &mut r).unwrap();
            assert_eq!(rec.moves_taken, 3_333);
            assert_eq!(rec.stop_reason, StopReason::BudgetExhausted);
            // parity of a is preserved by an odd number of ±1 moves
            assert_eq!((rec.final_a + 5_000 + 3_333) % 2, 0);
        }
    }

    #[test]
    fn ticks_mode_records_consistent_counters() {
        let m = Canonical::new(20).unwrap();
        let opts = WalkOptions::new(Budget::Limited(200), BudgetMode::Ticks);
        let mut r = rng(4);
        for _ in 0..1000 {
            let rec = run_walk(10, &m, &opts, &mut r).unwrap();
            let ticks = rec.ticks_taken.unwrap();
            assert!(rec.moves_taken <= ticks);
            match rec.stop_reason {
                StopReason::BudgetExhausted => assert_eq!(ticks, 200),
                _ => {
                    assert!(rec.final_a == 0 || rec.final_a == 20);
                    assert_eq!(rec.stopping_time, Some(ticks));
                }
            }
        }
    }

    #[test]
    fn ceiling_hit_is_an_error() {
        let m = Canonical::new(1_000).unwrap();
        let opts = WalkOptions::new(Budget::Unlimited, BudgetMode::Moves).with_ceiling(10);
        assert!(matches!(
            run_walk(500, &m, &opts, &mut rng(5)),
            Err(Error::CeilingReached { ceiling: 10, .. })
        ));
    }

    #[test]
    fn unlimited_walks_end_on_an_endpoint() {
        let m = Canonical::new(300).unwrap();
        let opts = WalkOptions::new(Budget::Unlimited, BudgetMode::Moves);
        let mut r = rng(6);
        for a0 in [1, 2, 150, 298, 299] {
            let rec = run_walk(a0, &m, &opts, &mut r).unwrap();
            assert!(rec.is_absorbed());
            assert!(rec.final_a == 0 || rec.final_a == 300);
            assert_eq!(rec.stopping_time, Some(rec.moves_taken));
            assert_eq!((rec.moves_taken + a0 + rec.final_a) % 2, 0);
        }
    }

    #[test]
    fn degenerate_model_that_never_moves_exhausts_ticks() {
        // p = 1 inside the lattice: every tick is a stay.
        let m = Tabulated::new(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let rec = run_walk(1, &m, &WalkOptions::new(Budget::Limited(17), BudgetMode::Ticks), &mut rng(8)).unwrap();
        assert_eq!((rec.final_a, rec.ticks_taken, rec.moves_taken), (1, Some(17), 0));
        let unlimited = WalkOptions::new(Budget::Unlimited, BudgetMode::Ticks).with_ceiling(1_000);
        assert!(run_walk(1, &m, &unlimited, &mut rng(8)).is_err());
    }

    #[test]
    fn large_blocks_use_binomial_sampler() {
        // N = 10⁶ starting mid-lattice gives blocks far above the bitwise limit.
        let m = Canonical::new(1_000_000).unwrap();
        let opts = WalkOptions::new(Budget::Limited(40_000), BudgetMode::Moves);
        let mut r = rng(9);
        let trials = 20_000;
        let mut sum = 0f64;
        let mut sum_sq = 0f64;
        for _ in 0..trials {
            let rec = run_walk(500_000, &m, &opts, &mut r).unwrap();
            let d = rec.final_a as f64 - 500_000.0;
            sum += d;
            sum_sq += d * d;
        }
        let mean = sum / trials as f64;
        let var = sum_sq / trials as f64 - mean * mean;
        // displacement after n fair moves: mean 0, variance n
        assert!(mean.abs() < 3.0 * (40_000f64 / trials as f64).sqrt(), "mean {mean}");
        let var_sd = 40_000.0 * (2.0 / trials as f64).sqrt();
        assert!((var - 40_000.0).abs() < 3.0 * var_sd, "var {var}");
    }

    #[test]
    fn budget_parses_and_serializes() {
        assert_eq!("unlimited".parse::<Budget>().unwrap(), Budget::Unlimited);
        assert_eq!(" 42 ".parse::<Budget>().unwrap(), Budget::Limited(42));
        assert!("-1".parse::<Budget>().is_err());
        assert_eq!(serde_json::to_string(&Budget::Limited(7)).unwrap(), "7");
        assert_eq!(serde_json::to_string(&Budget::Unlimited).unwrap(), "\"unlimited\"");
        assert_eq!(serde_json::from_str::<Budget>("\"unlimited\"").unwrap(), Budget::Unlimited);
        assert_eq!(serde_json::from_str::<Budget>("12").unwrap(), Budget::Limited(12));
        assert!(serde_json::from_str::<Budget>("-3").is_err());
    }
}
