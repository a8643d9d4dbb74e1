//! Substitution-rate models.
//!
//! The RN+YpR family is parameterized by sixteen rates: for each target
//! letter `x` a background rate `v_x` and a within-class rate `w_x` with
//! `0 <= v_x <= w_x`, plus eight dinucleotide interaction rates `r_x^y`
//! acting on the four pyrimidine-purine (YpR) neighbor pairs. Purine
//! targets (`a`, `g`) read the site and its left neighbor, pyrimidine
//! targets (`t`, `c`) the site and its right neighbor.
//!
//! [`GenericRateModel`] is the partition (level) representation of an
//! arbitrary finite-range rate function with window radius at most one:
//! per target, a list of disjoint window cells with non-decreasing rates.
//! It drives the checker constants and the dual-set process, and every
//! RN+YpR model converts into it exactly.

use serde::{Deserialize, Serialize};

use crate::alphabet::Nucleotide;
use crate::error::Error;
use crate::Result;

/// The sixteen substitution rates of the RN+YpR model, in events per unit
/// time. `r_x_y` is the rate toward target `x` when the YpR-context
/// neighbor holds `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnYprParams {
    pub v_a: f64,
    pub v_t: f64,
    pub v_c: f64,
    pub v_g: f64,
    pub w_a: f64,
    pub w_t: f64,
    pub w_c: f64,
    pub w_g: f64,
    pub r_a_c: f64,
    pub r_a_t: f64,
    pub r_t_a: f64,
    pub r_t_g: f64,
    pub r_c_a: f64,
    pub r_c_g: f64,
    pub r_g_c: f64,
    pub r_g_t: f64,
}

impl RnYprParams {
    /// Validate and return the full sixteen-rate vector.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        v: [f64; 4],
        w: [f64; 4],
        r_a_c: f64,
        r_a_t: f64,
        r_t_a: f64,
        r_t_g: f64,
        r_c_a: f64,
        r_c_g: f64,
        r_g_c: f64,
        r_g_t: f64,
    ) -> Result<RnYprParams> {
        let params = RnYprParams {
            v_a: v[0],
            v_t: v[1],
            v_c: v[2],
            v_g: v[3],
            w_a: w[0],
            w_t: w[1],
            w_c: w[2],
            w_g: w[3],
            r_a_c,
            r_a_t,
            r_t_a,
            r_t_g,
            r_c_a,
            r_c_g,
            r_g_c,
            r_g_t,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named_rates() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "rate {name} = {value} must be finite and non-negative"
                )));
            }
        }
        for x in Nucleotide::ALL {
            if self.v(x) > self.w(x) {
                return Err(Error::InvalidParameter(format!(
                    "v_{x} = {} exceeds w_{x} = {}",
                    self.v(x),
                    self.w(x)
                )));
            }
        }
        Ok(())
    }

    pub fn named_rates(&self) -> [(&'static str, f64); 16] {
        [
            ("v_a", self.v_a),
            ("v_t", self.v_t),
            ("v_c", self.v_c),
            ("v_g", self.v_g),
            ("w_a", self.w_a),
            ("w_t", self.w_t),
            ("w_c", self.w_c),
            ("w_g", self.w_g),
            ("r_a_c", self.r_a_c),
            ("r_a_t", self.r_a_t),
            ("r_t_a", self.r_t_a),
            ("r_t_g", self.r_t_g),
            ("r_c_a", self.r_c_a),
            ("r_c_g", self.r_c_g),
            ("r_g_c", self.r_g_c),
            ("r_g_t", self.r_g_t),
        ]
    }

    #[inline]
    pub fn v(&self, x: Nucleotide) -> f64 {
        match x {
            Nucleotide::A => self.v_a,
            Nucleotide::T => self.v_t,
            Nucleotide::C => self.v_c,
            Nucleotide::G => self.v_g,
        }
    }

    #[inline]
    pub fn w(&self, x: Nucleotide) -> f64 {
        match x {
            Nucleotide::A => self.w_a,
            Nucleotide::T => self.w_t,
            Nucleotide::C => self.w_c,
            Nucleotide::G => self.w_g,
        }
    }

    /// The YpR interaction rate toward `target` with context letter
    /// `context`, or `None` when the pair is not one of the eight defined
    /// slots (purine target with pyrimidine context or vice versa).
    #[inline]
    pub fn ypr_rate(&self, target: Nucleotide, context: Nucleotide) -> Option<f64> {
        use Nucleotide::{A, C, G, T};
        match (target, context) {
            (A, C) => Some(self.r_a_c),
            (A, T) => Some(self.r_a_t),
            (T, A) => Some(self.r_t_a),
            (T, G) => Some(self.r_t_g),
            (C, A) => Some(self.r_c_a),
            (C, G) => Some(self.r_c_g),
            (G, C) => Some(self.r_g_c),
            (G, T) => Some(self.r_g_t),
            _ => None,
        }
    }

    /// The two context letters of a target: pyrimidines read `{a, g}` on
    /// the right, purines read `{c, t}` on the left.
    pub fn context_letters(target: Nucleotide) -> [Nucleotide; 2] {
        if target.is_purine() {
            [Nucleotide::C, Nucleotide::T]
        } else {
            [Nucleotide::A, Nucleotide::G]
        }
    }

    /// Relabel rates under the strand-complement letter swap.
    pub fn complemented(&self) -> RnYprParams {
        RnYprParams {
            v_a: self.v_t,
            v_t: self.v_a,
            v_c: self.v_g,
            v_g: self.v_c,
            w_a: self.w_t,
            w_t: self.w_a,
            w_c: self.w_g,
            w_g: self.w_c,
            // r_x^y maps to r_{comp x}^{comp y}
            r_a_c: self.r_t_g,
            r_a_t: self.r_t_a,
            r_t_a: self.r_a_t,
            r_t_g: self.r_a_c,
            r_c_a: self.r_g_t,
            r_c_g: self.r_g_c,
            r_g_c: self.r_c_g,
            r_g_t: self.r_c_a,
        }
    }
}

/// Substitution rate toward `target` given the letters read by its window.
/// Purine targets consult `(left, center)`, pyrimidine targets
/// `(center, right)`; a self-substitution (`center == target`) has rate 0.
pub fn substitution_rate(
    params: &RnYprParams,
    target: Nucleotide,
    left: Nucleotide,
    center: Nucleotide,
    right: Nucleotide,
) -> f64 {
    use Nucleotide::{A, C, G, T};
    if center == target {
        return 0.0;
    }
    match target {
        A | G => {
            if center.is_pyrimidine() {
                params.v(target)
            } else {
                // center is the other purine; the left neighbor may form a
                // YpR pair with it
                debug_assert_eq!(center, if target == A { G } else { A });
                let mut rate = params.w(target);
                if left.is_pyrimidine() {
                    rate += params
                        .ypr_rate(target, left)
                        .expect("purine target, Y context");
                }
                rate
            }
        }
        T | C => {
            if center.is_purine() {
                params.v(target)
            } else {
                debug_assert_eq!(center, if target == T { C } else { T });
                let mut rate = params.w(target);
                if right.is_purine() {
                    rate += params
                        .ypr_rate(target, right)
                        .expect("pyrimidine target, R context");
                }
                rate
            }
        }
    }
}

/// One part of the two-part generator decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionPart {
    /// Supremum of the part's effective rates.
    pub k: f64,
    /// Infimum of the part's effective rates.
    pub m: f64,
    /// Maximal window size of the part.
    pub s: u32,
    /// Largest level increment of the part (max over targets and levels
    /// `j >= 1`).
    pub lambda_bar: f64,
}

/// Constants derived from an RN+YpR parameter set, feeding every checker
/// condition and the branching domination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Infimum of the effective substitution rates, `min_x v_x`.
    pub m: f64,
    /// Supremum of the substitution rates, `max { w_x + r_x^y }`.
    pub k: f64,
    /// Maximal window size.
    pub s: u32,
    /// Sum of the base level rates, `sum_x v_x`.
    pub lambda_bar_0: f64,
    /// Largest level increment, `max({w_x - v_x} U cal_y U cal_r)`.
    pub lambda_bar: f64,
    /// Gaps and minima of the pyrimidine-target interaction pairs:
    /// `{ |r_x^a - r_x^g|, r_x^a /\ r_x^g : x in {c, t} }`.
    pub cal_y: [f64; 4],
    /// Gaps and minima of the purine-target interaction pairs.
    pub cal_r: [f64; 4],
    /// Two-part decomposition: part 1 carries the interaction levels,
    /// part 2 the single-site background.
    pub parts: [DecompositionPart; 2],
    /// Base rate sum of the decomposition, equal to `lambda_bar_0`.
    pub lambda_bar_0d: f64,
    /// Sum form `sum_x (w_x - v_x)` of part 2's level increments; recorded
    /// alongside the max form stored in `parts[1].lambda_bar`. It never
    /// enters a condition since part 2 has `s = 1`.
    pub lambda_bar_2_sum: f64,
}

impl DerivedConstants {
    pub fn max_y_r(&self) -> f64 {
        self.cal_y
            .iter()
            .chain(&self.cal_r)
            .copied()
            .fold(0.0, f64::max)
    }
}

/// Compute every derived constant of an RN+YpR parameter set.
pub fn derived_constants(params: &RnYprParams) -> DerivedConstants {
    let vs = Nucleotide::ALL.map(|x| params.v(x));
    let ws = Nucleotide::ALL.map(|x| params.w(x));
    let m = vs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut k: f64 = 0.0;
    let mut max_r: f64 = 0.0;
    for target in Nucleotide::ALL {
        for context in RnYprParams::context_letters(target) {
            let r = params.ypr_rate(target, context).expect("valid slot");
            k = k.max(params.w(target) + r);
            max_r = max_r.max(r);
        }
    }
    let lambda_bar_0: f64 = vs.iter().sum();

    let pair = |target: Nucleotide| -> [f64; 2] {
        let [c1, c2] = RnYprParams::context_letters(target);
        let r1 = params.ypr_rate(target, c1).expect("valid slot");
        let r2 = params.ypr_rate(target, c2).expect("valid slot");
        [r1.max(r2) - r1.min(r2), r1.min(r2)]
    };
    let [yc, yt] = [pair(Nucleotide::C), pair(Nucleotide::T)];
    let cal_y = [yc[0], yc[1], yt[0], yt[1]];
    let [ra, rg] = [pair(Nucleotide::A), pair(Nucleotide::G)];
    let cal_r = [ra[0], ra[1], rg[0], rg[1]];

    let max_y_r = cal_y.iter().chain(&cal_r).copied().fold(0.0, f64::max);
    let max_w_minus_v = Nucleotide::ALL
        .iter()
        .map(|&x| params.w(x) - params.v(x))
        .fold(0.0, f64::max);
    let lambda_bar = max_w_minus_v.max(max_y_r);

    let parts = [
        DecompositionPart {
            k: max_r,
            m: 0.0,
            s: 2,
            lambda_bar: max_y_r,
        },
        DecompositionPart {
            k: ws.iter().copied().fold(0.0, f64::max),
            m,
            s: 1,
            lambda_bar: max_w_minus_v,
        },
    ];
    let lambda_bar_2_sum = Nucleotide::ALL
        .iter()
        .map(|&x| params.w(x) - params.v(x))
        .sum();

    DerivedConstants {
        m,
        k,
        s: 2,
        lambda_bar_0,
        lambda_bar,
        cal_y,
        cal_r,
        parts,
        lambda_bar_0d: lambda_bar_0,
        lambda_bar_2_sum,
    }
}

/// The T92+cpg specialization: class-dependent background rates split by
/// `theta` and a single interaction rate toward `a` after `c` and toward
/// `t` before `g`.
pub fn specialize_t92(theta: f64, v: f64, w: f64, r: f64) -> Result<RnYprParams> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} must lie in [0, 1]"
        )));
    }
    RnYprParams::new(
        [
            (1.0 - theta) * v, // a
            (1.0 - theta) * v, // t
            theta * v,         // c
            theta * v,         // g
        ],
        [(1.0 - theta) * w, (1.0 - theta) * w, theta * w, theta * w],
        r,   // r_a_c
        0.0, // r_a_t
        0.0, // r_t_a
        r,   // r_t_g
        0.0,
        0.0,
        0.0,
        0.0,
    )
}

/// The JC+cpg specialization: all background rates equal, the same two
/// interaction slots as T92. Coincides with `specialize_t92(1/2, 2v, 2v, r)`.
pub fn specialize_jc(v: f64, r: f64) -> Result<RnYprParams> {
    RnYprParams::new(
        [v; 4], [v; 4], r,   // r_a_c
        0.0, // r_a_t
        0.0, // r_t_a
        r,   // r_t_g
        0.0, 0.0, 0.0, 0.0,
    )
}

/// The RNc+YpR specialization: rates respecting strand complementarity.
/// Targets `a, t` share `(v_w, w_w)` and interaction rates `r_u`
/// (`r_a^t = r_t^a`) and `r_w` (`r_a^c = r_t^g`); targets `c, g` share
/// `(v_s, w_s)` and rates `r_s` (`r_c^a = r_g^t`) and `r_v`
/// (`r_c^g = r_g^c`).
#[allow(clippy::too_many_arguments)]
pub fn specialize_rnc(
    v_w: f64,
    v_s: f64,
    w_w: f64,
    w_s: f64,
    r_u: f64,
    r_w: f64,
    r_s: f64,
    r_v: f64,
) -> Result<RnYprParams> {
    RnYprParams::new(
        [v_w, v_w, v_s, v_s],
        [w_w, w_w, w_s, w_s],
        r_w, // r_a_c
        r_u, // r_a_t
        r_u, // r_t_a
        r_w, // r_t_g
        r_s, // r_c_a
        r_v, // r_c_g
        r_v, // r_g_c
        r_s, // r_g_t
    )
}

// ---------------------------------------------------------------------------
// Generic partition representation
// ---------------------------------------------------------------------------

/// Bitmask over the 64 radius-1 windows `(left, center, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSet(u64);

impl WindowSet {
    pub const EMPTY: WindowSet = WindowSet(0);

    #[inline]
    pub fn window_index(left: Nucleotide, center: Nucleotide, right: Nucleotide) -> usize {
        left.index() * 16 + center.index() * 4 + right.index()
    }

    #[inline]
    pub fn window_from_index(i: usize) -> (Nucleotide, Nucleotide, Nucleotide) {
        (
            Nucleotide::from_index(i / 16),
            Nucleotide::from_index((i / 4) % 4),
            Nucleotide::from_index(i % 4),
        )
    }

    #[inline]
    pub fn insert(&mut self, left: Nucleotide, center: Nucleotide, right: Nucleotide) {
        self.0 |= 1 << Self::window_index(left, center, right);
    }

    #[inline]
    pub fn contains(&self, left: Nucleotide, center: Nucleotide, right: Nucleotide) -> bool {
        self.0 & (1 << Self::window_index(left, center, right)) != 0
    }

    #[inline]
    pub fn union(self, other: WindowSet) -> WindowSet {
        WindowSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersects(self, other: WindowSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Offsets in `{-1, 0, 1}` the membership test actually depends on.
    pub fn dependent_offsets(self) -> Vec<i64> {
        let mut offsets = Vec::new();
        for (offset, vary) in [(-1i64, 16usize), (0, 4), (1, 1)] {
            // vary the coordinate at `offset` and look for a membership flip
            let mut depends = false;
            'outer: for i in 0..64usize {
                let base = i - (i / vary % 4) * vary;
                let first = self.0 >> (base) & 1;
                for letter in 1..4 {
                    if (self.0 >> (base + letter * vary)) & 1 != first {
                        depends = true;
                        break 'outer;
                    }
                }
            }
            if depends {
                offsets.push(offset);
            }
        }
        offsets
    }
}

/// One level of a target's partition: a cell of windows, the rate on the
/// cell, and the offsets the cell reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionLevel {
    /// Level rate `lambda_j`.
    pub rate: f64,
    /// Increment over the previous level (`lambda_j - lambda_{j-1}`, and
    /// `lambda_0` itself at level 0).
    pub increment: f64,
    /// Offsets the cell depends on, a subset of `{-1, 0, 1}`.
    pub offsets: Vec<i64>,
    /// The cell itself.
    pub windows: WindowSet,
}

/// Partition representation of one target's rate function: disjoint window
/// cells with non-decreasing rates, jointly covering every window whose
/// center differs from the target. The center-equals-target windows form a
/// null self-transition cell excluded from the partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetPartition {
    pub target: Nucleotide,
    pub levels: Vec<PartitionLevel>,
}

impl TargetPartition {
    /// Union of offsets over all levels.
    pub fn window_offsets(&self) -> Vec<i64> {
        let mut all: Vec<i64> = self.levels.iter().flat_map(|l| l.offsets.clone()).collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// A radius-at-most-one rate model in partition form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenericRateModel {
    pub radius: usize,
    partitions: [TargetPartition; 4],
}

impl GenericRateModel {
    /// The exact partition of an RN+YpR model.
    ///
    /// Per target, level 0 is the opposite-class cell at the background
    /// rate, level 1 the within-class cell without an interacting neighbor,
    /// and levels 2 and 3 the two YpR cells ordered by their rates (the
    /// lower of the two interaction rates first; ties resolved by display
    /// order of the context letters).
    pub fn from_rnypr(params: &RnYprParams) -> GenericRateModel {
        let partitions = Nucleotide::ALL.map(|target| {
            let purine_target = target.is_purine();
            let other = if purine_target {
                // the other purine, read at the center
                if target == Nucleotide::A {
                    Nucleotide::G
                } else {
                    Nucleotide::A
                }
            } else if target == Nucleotide::T {
                Nucleotide::C
            } else {
                Nucleotide::T
            };
            let [c1, c2] = RnYprParams::context_letters(target);
            let r1 = params.ypr_rate(target, c1).expect("valid slot");
            let r2 = params.ypr_rate(target, c2).expect("valid slot");
            let (low_ctx, low_r, high_ctx, high_r) = if r1 <= r2 {
                (c1, r1, c2, r2)
            } else {
                (c2, r2, c1, r1)
            };

            let mut level0 = WindowSet::EMPTY;
            let mut level1 = WindowSet::EMPTY;
            let mut level2 = WindowSet::EMPTY;
            let mut level3 = WindowSet::EMPTY;
            for l in Nucleotide::ALL {
                for r in Nucleotide::ALL {
                    // opposite-class centers sit at the background rate
                    for center in Nucleotide::ALL {
                        if center != other && center != target {
                            level0.insert(l, center, r);
                        }
                    }
                    let context = if purine_target { l } else { r };
                    if context == low_ctx {
                        level2.insert(l, other, r);
                    } else if context == high_ctx {
                        level3.insert(l, other, r);
                    } else {
                        level1.insert(l, other, r);
                    }
                }
            }

            let v = params.v(target);
            let w = params.w(target);
            let context_offset = if purine_target { -1 } else { 1 };
            TargetPartition {
                target,
                levels: vec![
                    PartitionLevel {
                        rate: v,
                        increment: v,
                        offsets: vec![0],
                        windows: level0,
                    },
                    PartitionLevel {
                        rate: w,
                        increment: w - v,
                        offsets: vec![context_offset.min(0), context_offset.max(0)],
                        windows: level1,
                    },
                    PartitionLevel {
                        rate: w + low_r,
                        increment: low_r,
                        offsets: vec![context_offset.min(0), context_offset.max(0)],
                        windows: level2,
                    },
                    PartitionLevel {
                        rate: w + high_r,
                        increment: high_r - low_r,
                        offsets: vec![context_offset.min(0), context_offset.max(0)],
                        windows: level3,
                    },
                ],
            }
        });
        GenericRateModel {
            radius: 1,
            partitions,
        }
    }

    /// Radius-0 model of independent sites driven by a 4x4 generator
    /// matrix: the rate toward `a` from center `b` is `q(b, a)`.
    pub fn independent(q: &QMatrix) -> GenericRateModel {
        let partitions = Nucleotide::ALL.map(|target| {
            // one cell per non-target center letter, sorted by rate
            let mut cells: Vec<(f64, Nucleotide)> = Nucleotide::ALL
                .iter()
                .filter(|&&b| b != target)
                .map(|&b| (q.rate(b, target), b))
                .collect();
            cells.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.index().cmp(&y.1.index())));
            let mut levels = Vec::with_capacity(3);
            let mut prev = 0.0;
            for (rate, center) in cells {
                let mut windows = WindowSet::EMPTY;
                for l in Nucleotide::ALL {
                    for r in Nucleotide::ALL {
                        windows.insert(l, center, r);
                    }
                }
                levels.push(PartitionLevel {
                    rate,
                    increment: rate - prev,
                    offsets: vec![0],
                    windows,
                });
                prev = rate;
            }
            TargetPartition { target, levels }
        });
        GenericRateModel {
            radius: 0,
            partitions,
        }
    }

    /// Build the canonical partition of an arbitrary radius-1 window-rate
    /// function: per target, windows with equal rates are grouped into one
    /// cell, cells sorted by increasing rate, dependent offsets detected
    /// from the cell masks.
    pub fn from_window_rates<F>(rate_fn: F) -> Result<GenericRateModel>
    where
        F: Fn(Nucleotide, Nucleotide, Nucleotide, Nucleotide) -> f64,
    {
        let mut partitions = Vec::with_capacity(4);
        let mut radius = 0usize;
        for target in Nucleotide::ALL {
            let mut by_rate: Vec<(f64, WindowSet)> = Vec::new();
            for i in 0..64usize {
                let (l, c, r) = WindowSet::window_from_index(i);
                if c == target {
                    continue; // null self-transition cell
                }
                let rate = rate_fn(target, l, c, r);
                if !rate.is_finite() || rate < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "rate toward {target} on window {l}{c}{r} is {rate}"
                    )));
                }
                match by_rate.iter_mut().find(|(v, _)| *v == rate) {
                    Some((_, set)) => set.insert(l, c, r),
                    None => {
                        let mut set = WindowSet::EMPTY;
                        set.insert(l, c, r);
                        by_rate.push((rate, set));
                    }
                }
            }
            by_rate.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut levels = Vec::with_capacity(by_rate.len());
            let mut prev = 0.0;
            for (rate, windows) in by_rate {
                let offsets = windows.dependent_offsets();
                for &o in &offsets {
                    radius = radius.max(o.unsigned_abs() as usize);
                }
                levels.push(PartitionLevel {
                    rate,
                    increment: rate - prev,
                    offsets,
                    windows,
                });
                prev = rate;
            }
            partitions.push(TargetPartition { target, levels });
        }
        Ok(GenericRateModel {
            radius,
            partitions: partitions.try_into().expect("four targets"),
        })
    }

    #[inline]
    pub fn partition(&self, target: Nucleotide) -> &TargetPartition {
        &self.partitions[target.index()]
    }

    pub fn partitions(&self) -> &[TargetPartition; 4] {
        &self.partitions
    }

    /// Rate from the partition: the level whose cell contains the window.
    pub fn rate(&self, target: Nucleotide, l: Nucleotide, c: Nucleotide, r: Nucleotide) -> f64 {
        if c == target {
            return 0.0;
        }
        for level in &self.partitions[target.index()].levels {
            if level.windows.contains(l, c, r) {
                return level.rate;
            }
        }
        0.0
    }

    /// Rate reconstructed from the cumulative form: the sum of level
    /// increments over levels whose upward union contains the window.
    pub fn reconstruct_rate(
        &self,
        target: Nucleotide,
        l: Nucleotide,
        c: Nucleotide,
        r: Nucleotide,
    ) -> f64 {
        if c == target {
            return 0.0;
        }
        let levels = &self.partitions[target.index()].levels;
        let mut rate = 0.0;
        let mut upward = WindowSet::EMPTY;
        for level in levels.iter().rev() {
            upward = upward.union(level.windows);
            if upward.contains(l, c, r) {
                rate += level.increment;
            }
        }
        rate
    }

    /// Maximal window size `s = max_target |S(target)|`.
    pub fn window_size(&self) -> u32 {
        self.partitions
            .iter()
            .map(|p| p.window_offsets().len() as u32)
            .max()
            .unwrap_or(0)
    }

    /// Base level rate of a target, `lambda_0(target)`.
    pub fn base_rate(&self, target: Nucleotide) -> f64 {
        self.partitions[target.index()]
            .levels
            .first()
            .map(|l| l.rate)
            .unwrap_or(0.0)
    }

    /// Total base rate over targets.
    pub fn total_base_rate(&self) -> f64 {
        Nucleotide::ALL.iter().map(|&a| self.base_rate(a)).sum()
    }

    /// Largest level increment over all targets and levels `j >= 1`.
    pub fn max_increment(&self) -> f64 {
        self.partitions
            .iter()
            .flat_map(|p| p.levels.iter().skip(1))
            .map(|l| l.increment)
            .fold(0.0, f64::max)
    }

    /// Per-target levels `j >= 1` paired with the offsets of the upward
    /// union of level supports, `union_{l >= j} S_l(target)`; these drive
    /// the growth moves of the dual-set process.
    pub fn growth_levels(&self, target: Nucleotide) -> Vec<(f64, Vec<i64>)> {
        let levels = &self.partitions[target.index()].levels;
        let mut out: Vec<(f64, Vec<i64>)> = Vec::new();
        let mut upward: Vec<i64> = Vec::new();
        let mut reversed: Vec<(f64, Vec<i64>)> = Vec::new();
        for level in levels.iter().skip(1).rev() {
            for &o in &level.offsets {
                if !upward.contains(&o) {
                    upward.push(o);
                }
            }
            let mut offs = upward.clone();
            offs.sort_unstable();
            reversed.push((level.increment, offs));
        }
        reversed.reverse();
        out.extend(reversed);
        out
    }

    /// Partition indicator sum on a window (0 on self-transition windows,
    /// 1 elsewhere when the partition is valid).
    pub fn indicator_sum(
        &self,
        target: Nucleotide,
        l: Nucleotide,
        c: Nucleotide,
        r: Nucleotide,
    ) -> u32 {
        self.partitions[target.index()]
            .levels
            .iter()
            .map(|level| u32::from(level.windows.contains(l, c, r)))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Independent-site generator matrices
// ---------------------------------------------------------------------------

/// A 4x4 continuous-time generator on the alphabet: non-negative
/// off-diagonal rates, rows summing to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QMatrix {
    rates: [[f64; 4]; 4],
}

impl QMatrix {
    /// Build from off-diagonal rates `q(from, to)`; diagonals are filled
    /// so rows sum to zero, whatever was passed on them.
    pub fn from_rates(mut rates: [[f64; 4]; 4]) -> Result<QMatrix> {
        for (i, row) in rates.iter_mut().enumerate() {
            let mut total = 0.0;
            for (j, &value) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "generator entry ({i},{j}) = {value} must be finite and non-negative"
                    )));
                }
                total += value;
            }
            row[i] = -total;
        }
        Ok(QMatrix { rates })
    }

    /// The symmetric generator with every off-diagonal rate equal.
    pub fn symmetric(rate: f64) -> QMatrix {
        let mut rates = [[rate; 4]; 4];
        for (i, row) in rates.iter_mut().enumerate() {
            row[i] = -3.0 * rate;
        }
        QMatrix { rates }
    }

    /// Off-diagonal rate from one letter to another; 0 on the diagonal.
    #[inline]
    pub fn rate(&self, from: Nucleotide, to: Nucleotide) -> f64 {
        if from == to {
            0.0
        } else {
            self.rates[from.index()][to.index()]
        }
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.rates
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Nucleotide::{A, C, G, T};

    fn t92_example() -> RnYprParams {
        specialize_t92(0.3, 1.0, 2.0, 5.0).unwrap()
    }

    #[test]
    fn substitution_rate_window_cases() {
        let p = RnYprParams::new(
            [0.3, 0.4, 0.5, 0.6],
            [1.3, 1.4, 1.5, 1.6],
            0.11,
            0.12,
            0.21,
            0.22,
            0.31,
            0.32,
            0.41,
            0.42,
        )
        .unwrap();
        // toward a, center g, left c: class rate plus the YpR term
        assert_eq!(substitution_rate(&p, A, C, G, A), p.w_a + p.r_a_c);
        // toward a from a pyrimidine center: background rate, neighbors ignored
        assert_eq!(substitution_rate(&p, A, G, T, G), p.v_a);
        assert_eq!(substitution_rate(&p, A, C, T, C), p.v_a);
        // self-substitution is null
        assert_eq!(substitution_rate(&p, A, C, A, G), 0.0);
        // toward t, center c, right g
        assert_eq!(substitution_rate(&p, T, A, C, G), p.w_t + p.r_t_g);
        // toward t, center c, right pyrimidine: no interaction
        assert_eq!(substitution_rate(&p, T, A, C, C), p.w_t);
    }

    #[test]
    fn jc_derived_constants() {
        let (v, r) = (0.7, 1.9);
        let d = derived_constants(&specialize_jc(v, r).unwrap());
        assert_eq!(d.m, v);
        assert_eq!(d.k, v + r);
        assert_eq!(d.s, 2);
        assert_eq!(d.lambda_bar_0, 4.0 * v);
        assert_eq!(d.lambda_bar, r);
        assert_eq!(d.max_y_r(), r);
        assert_eq!(d.parts[0].lambda_bar, r);
        assert_eq!(d.parts[0].s, 2);
        assert_eq!(d.parts[0].m, 0.0);
        assert_eq!(d.parts[1].s, 1);
        assert_eq!(d.parts[1].m, v);
        assert_eq!(d.lambda_bar_0d, 4.0 * v);
    }

    #[test]
    fn flat_model_constants() {
        let p =
            RnYprParams::new([1.0; 4], [1.0; 4], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let d = derived_constants(&p);
        assert_eq!(d.lambda_bar, 0.0);
        assert_eq!(d.k, 1.0);
        assert_eq!(d.m, 1.0);
    }

    #[test]
    fn rnc_interaction_set_reduces_to_four_values() {
        let (r_u, r_w, r_s, r_v) = (0.2, 0.9, 0.4, 1.1);
        let p = specialize_rnc(1.0, 2.0, 1.5, 2.5, r_u, r_w, r_s, r_v).unwrap();
        let d = derived_constants(&p);
        let mut all: Vec<f64> = d.cal_y.iter().chain(&d.cal_r).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let mut expected = vec![
            r_u.max(r_w) - r_u.min(r_w),
            r_u.min(r_w),
            r_s.max(r_v) - r_s.min(r_v),
            r_s.min(r_v),
        ];
        expected.sort_by(f64::total_cmp);
        expected.dedup();
        assert_eq!(all, expected);
    }

    #[test]
    fn t92_specialization() {
        let p = specialize_t92(0.5, 1.0, 3.0, 2.0).unwrap();
        for x in Nucleotide::ALL {
            assert_eq!(p.v(x), 0.5);
            assert_eq!(p.w(x), 1.5);
        }
        assert_eq!(p.r_a_c, 2.0);
        assert_eq!(p.r_t_g, 2.0);
        assert_eq!(
            p.r_a_t + p.r_t_a + p.r_c_a + p.r_c_g + p.r_g_c + p.r_g_t,
            0.0
        );

        let p0 = specialize_t92(0.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(p0.v_c, 0.0);
        assert_eq!(p0.v_g, 0.0);

        assert!(specialize_t92(1.5, 1.0, 2.0, 0.0).is_err());
        assert!(specialize_t92(0.5, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn jc_equals_t92_at_half_theta_doubled() {
        let (v, r) = (0.8, 1.3);
        assert_eq!(
            specialize_jc(v, r).unwrap(),
            specialize_t92(0.5, 2.0 * v, 2.0 * v, r).unwrap()
        );
    }

    #[test]
    fn rnc_collapses_to_jc() {
        let (v, r) = (1.2, 0.7);
        assert_eq!(
            specialize_rnc(v, v, v, v, 0.0, r, 0.0, 0.0).unwrap(),
            specialize_jc(v, r).unwrap()
        );
    }

    #[test]
    fn rnc_strand_complementarity() {
        let p = specialize_rnc(1.0, 2.0, 1.4, 2.2, 0.1, 0.2, 0.3, 0.4).unwrap();
        assert_eq!(p.w_a, p.w_t);
        assert_eq!(p.w_c, p.w_g);
        assert_eq!(p.v_a, p.v_t);
        assert_eq!(p.v_c, p.v_g);
        assert_eq!(p.r_a_t, p.r_t_a);
        assert_eq!(p.r_a_c, p.r_t_g);
        assert_eq!(p.r_c_a, p.r_g_t);
        assert_eq!(p.r_c_g, p.r_g_c);
        assert_eq!(p.complemented(), p);
    }

    #[test]
    fn partition_matches_closed_form_exhaustively() {
        let p = t92_example();
        let model = GenericRateModel::from_rnypr(&p);
        for target in Nucleotide::ALL {
            for l in Nucleotide::ALL {
                for c in Nucleotide::ALL {
                    for r in Nucleotide::ALL {
                        let direct = substitution_rate(&p, target, l, c, r);
                        assert_eq!(model.rate(target, l, c, r), direct);
                        assert_eq!(model.reconstruct_rate(target, l, c, r), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn table_level_rates() {
        let p = RnYprParams::new(
            [0.3, 0.4, 0.5, 0.6],
            [1.3, 1.4, 1.5, 1.6],
            0.7,
            0.2,
            0.21,
            0.22,
            0.31,
            0.32,
            0.41,
            0.42,
        )
        .unwrap();
        let model = GenericRateModel::from_rnypr(&p);
        let levels = &model.partition(A).levels;
        // level 3 carries the larger of the two interaction rates
        assert_eq!(levels[3].rate, p.w_a + p.r_a_c.max(p.r_a_t));
        assert_eq!(levels[2].rate, p.w_a + p.r_a_c.min(p.r_a_t));
        assert_eq!(levels[1].rate, p.w_a);
        assert_eq!(levels[0].rate, p.v_a);
        // monotone levels
        for part in model.partitions() {
            for pair in part.levels.windows(2) {
                assert!(pair[0].rate <= pair[1].rate);
            }
        }
        // reconstruction on a named window
        assert_eq!(model.reconstruct_rate(A, C, G, A), p.w_a + p.r_a_c);
    }

    #[test]
    fn flat_model_has_null_upper_levels() {
        let p =
            RnYprParams::new([1.0; 4], [1.0; 4], 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let model = GenericRateModel::from_rnypr(&p);
        for part in model.partitions() {
            for level in part.levels.iter().skip(1) {
                assert_eq!(level.increment, 0.0);
            }
        }
        assert_eq!(model.max_increment(), 0.0);
    }

    #[test]
    fn partition_indicator_sums_to_one_off_diagonal() {
        for model in [
            GenericRateModel::from_rnypr(&t92_example()),
            GenericRateModel::independent(&QMatrix::symmetric(1.0)),
        ] {
            for target in Nucleotide::ALL {
                for i in 0..64 {
                    let (l, c, r) = WindowSet::window_from_index(i);
                    let expected = u32::from(c != target);
                    assert_eq!(model.indicator_sum(target, l, c, r), expected);
                }
            }
        }
    }

    #[test]
    fn generic_from_window_rates_round_trips() {
        let p = t92_example();
        let rebuilt =
            GenericRateModel::from_window_rates(|t, l, c, r| substitution_rate(&p, t, l, c, r))
                .unwrap();
        assert_eq!(rebuilt.radius, 1);
        for target in Nucleotide::ALL {
            for i in 0..64 {
                let (l, c, r) = WindowSet::window_from_index(i);
                assert_eq!(
                    rebuilt.rate(target, l, c, r),
                    substitution_rate(&p, target, l, c, r)
                );
            }
        }
        assert_eq!(rebuilt.window_size(), 2);
    }

    #[test]
    fn independent_model_has_radius_zero() {
        let q = QMatrix::from_rates([
            [0.0, 1.0, 2.0, 3.0],
            [1.0, 0.0, 1.0, 1.0],
            [2.0, 1.0, 0.0, 1.0],
            [3.0, 1.0, 1.0, 0.0],
        ])
        .unwrap();
        let model = GenericRateModel::independent(&q);
        assert_eq!(model.radius, 0);
        assert_eq!(model.window_size(), 1);
        for target in Nucleotide::ALL {
            for i in 0..64 {
                let (l, c, r) = WindowSet::window_from_index(i);
                assert_eq!(model.rate(target, l, c, r), q.rate(c, target));
                assert_eq!(model.reconstruct_rate(target, l, c, r), q.rate(c, target));
            }
        }
        // growth moves of an independent model never reach beyond the site
        for target in Nucleotide::ALL {
            for (_, offsets) in model.growth_levels(target) {
                assert_eq!(offsets, vec![0]);
            }
        }
    }

    #[test]
    fn growth_levels_for_rnypr() {
        let model = GenericRateModel::from_rnypr(&t92_example());
        // purine targets grow one site to the left, pyrimidines to the right
        for (target, expected) in [
            (A, vec![-1, 0]),
            (G, vec![-1, 0]),
            (T, vec![0, 1]),
            (C, vec![0, 1]),
        ] {
            for (_, offsets) in model.growth_levels(target) {
                assert_eq!(offsets, expected);
            }
        }
    }

    #[test]
    fn window_set_dependency_detection() {
        // depends on the left letter only
        let mut left_c = WindowSet::EMPTY;
        for c in Nucleotide::ALL {
            for r in Nucleotide::ALL {
                left_c.insert(C, c, r);
            }
        }
        assert_eq!(left_c.dependent_offsets(), vec![-1]);
        // depends on left and center
        let mut lc = WindowSet::EMPTY;
        for r in Nucleotide::ALL {
            lc.insert(C, G, r);
        }
        assert_eq!(lc.dependent_offsets(), vec![-1, 0]);
        // depends on center and right
        let mut cr = WindowSet::EMPTY;
        for l in Nucleotide::ALL {
            cr.insert(l, T, A);
        }
        assert_eq!(cr.dependent_offsets(), vec![0, 1]);
        // the full set and the empty set depend on nothing
        let mut full = WindowSet::EMPTY;
        for i in 0..64 {
            let (l, c, r) = WindowSet::window_from_index(i);
            full.insert(l, c, r);
        }
        assert_eq!(full.dependent_offsets(), Vec::<i64>::new());
        assert_eq!(WindowSet::EMPTY.dependent_offsets(), Vec::<i64>::new());
    }

    #[test]
    fn validation_rejects_bad_rates() {
        assert!(RnYprParams::new(
            [1.0, 1.0, 1.0, 1.0],
            [0.5, 1.0, 1.0, 1.0],
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0
        )
        .is_err());
        assert!(
            RnYprParams::new([1.0; 4], [1.0; 4], -0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err()
        );
        assert!(RnYprParams::new(
            [f64::NAN; 4],
            [1.0; 4],
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0
        )
        .is_err());
    }
}
