//! Gap system and the monotone semiconjugacy onto the golden rotation.
//!
//! The orbit `p_k = T^k(0)` of the rotation by `alpha` is dense, and each
//! point `p_k` (`k >= 1`) is blown up into a gap `G_k` of length
//! `eps_k = (1 - 1/b) b^-(k-1)`, placed so that the gaps appear in the same
//! order as the points. Collapsing each gap back to its point gives a
//! nondecreasing map `h` with `h(g(x)) = T(h(x))` for the normalized map
//! `g`. Only the first `K` gaps are materialised; every quantity derived
//! here carries the tail mass `b^-K` as its truncation budget.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::CompensatedSum;
use crate::process::{ChaoticConfig, NormalizedMap, MAX_TRUNCATION_ORDER};
use crate::words::RotationParams;

/// Slack for rounding in gap endpoints and map evaluations on `[0, 1]`.
pub const POSITION_FUZZ: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("gap order {order} is outside 1..={cap}")]
    PrecisionUnreachable { order: usize, cap: usize },
    #[error("base b = {0} must exceed 1")]
    InvalidBase(f64),
    #[error("point {0} is outside [0, 1]")]
    Domain(f64),
}

/// One gap `G_k = [left, left + length]`, collapsed by `h` to `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub index: usize,
    pub point: f64,
    pub length: f64,
    pub left: f64,
}

impl GapEntry {
    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x <= self.right()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSystem {
    rotation: RotationParams,
    b: f64,
    order: usize,
    /// Sorted by `left` (equivalently by `point`).
    entries: Vec<GapEntry>,
    /// `rank[k - 1]` is the position of `G_k` in `entries`.
    rank: Vec<usize>,
    tail_mass: f64,
}

pub fn build_gap_system(alpha: f64, b: f64, order: usize) -> Result<GapSystem, GapError> {
    if order == 0 || order > MAX_TRUNCATION_ORDER {
        return Err(GapError::PrecisionUnreachable {
            order,
            cap: MAX_TRUNCATION_ORDER,
        });
    }
    if !(b > 1.0 && b.is_finite()) {
        return Err(GapError::InvalidBase(b));
    }
    let rotation = RotationParams::new(alpha).map_err(|_| GapError::Domain(alpha))?;

    let mut entries: Vec<GapEntry> = (1..=order)
        .map(|k| GapEntry {
            index: k,
            point: rotation.orbit_point(0.0, k as u64),
            length: (1.0 - 1.0 / b) * b.powi(-(k as i32 - 1)),
            left: 0.0,
        })
        .collect();
    entries.sort_by(|a, b| a.point.total_cmp(&b.point));
    // left endpoint of G_k = total length of gaps whose point lies below p_k
    let mut acc = CompensatedSum::default();
    for e in &mut entries {
        e.left = acc.value();
        acc.add(e.length);
    }
    let mut rank = vec![0; order];
    for (pos, e) in entries.iter().enumerate() {
        rank[e.index - 1] = pos;
    }
    Ok(GapSystem {
        rotation,
        b,
        order,
        entries,
        rank,
        tail_mass: b.powi(-(order as i32)),
    })
}

impl GapSystem {
    pub fn golden(b: f64, order: usize) -> Result<Self, GapError> {
        build_gap_system(RotationParams::golden().alpha(), b, order)
    }

    pub fn rotation(&self) -> &RotationParams {
        &self.rotation
    }

    pub fn alpha(&self) -> f64 {
        self.rotation.alpha()
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `b^-K`, the total length of the gaps left out.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Width within which the position of a truncated gap boundary is
    /// uncertain.
    pub fn resolution(&self) -> f64 {
        self.tail_mass + POSITION_FUZZ
    }

    /// Entries in left-to-right order.
    pub fn entries(&self) -> &[GapEntry] {
        &self.entries
    }

    pub fn gap(&self, k: usize) -> Option<&GapEntry> {
        (1..=self.order)
            .contains(&k)
            .then(|| &self.entries[self.rank[k - 1]])
    }

    pub fn total_length(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.length)
            .collect::<CompensatedSum>()
            .value()
    }

    /// Pairs `(k, j)` breaking `p_k < p_j  <=>  sup G_k <= inf G_j`.
    ///
    /// Neighbouring truncated gaps share an endpoint (the mass between them
    /// sits in the omitted tail), hence the non-strict inequality.
    pub fn ordering_violations(&self) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for a in &self.entries {
            for c in &self.entries {
                if a.index == c.index {
                    continue;
                }
                let by_point = a.point < c.point;
                let by_gap = a.right() <= c.left;
                if by_point != by_gap {
                    bad.push((a.index, c.index));
                }
            }
        }
        bad
    }

    /// Truncated `h`: the point of the rightmost gap starting at or before
    /// `x`, with `h(0) = 0` and `h(1) = 1`.
    pub fn h(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self.entries.partition_point(|e| e.left <= x) {
            0 => 0.0,
            i => self.entries[i - 1].point,
        }
    }

    /// Range of `h` over `[x - width, x + width]`.
    pub fn h_bracket(&self, x: f64, width: f64) -> (f64, f64) {
        (self.h(x - width), self.h(x + width))
    }
}

pub fn h_evaluate(gs: &GapSystem, x: f64) -> f64 {
    gs.h(x)
}

/// Outcome of a semiconjugacy check at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualCheck {
    Measured(f64),
    /// The point is too close to the discontinuity for the truncated
    /// system to decide which branch applies.
    Inconclusive,
}

impl ResidualCheck {
    pub fn value(&self) -> Option<f64> {
        match self {
            ResidualCheck::Measured(v) => Some(*v),
            ResidualCheck::Inconclusive => None,
        }
    }
}

/// `|h(g(x)) - T(h(x))|`, with `h` read off the truncated gap system.
///
/// Values of `h` are taken over a rounding-sized bracket around each
/// argument and the residual is the distance between the two resulting
/// intervals, so a point sitting exactly on a gap boundary is not charged
/// for floating-point noise in that boundary.
pub fn semiconjugacy_residual(
    gs: &GapSystem,
    m: &NormalizedMap,
    x: f64,
) -> Result<ResidualCheck, GapError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(GapError::Domain(x));
    }
    if (x - m.breakpoint).abs() <= gs.resolution() {
        return Ok(ResidualCheck::Inconclusive);
    }
    let cut = gs.rotation.cut();
    let (h_lo, h_hi) = gs.h_bracket(x, POSITION_FUZZ);
    if h_lo < cut && cut <= h_hi {
        return Ok(ResidualCheck::Inconclusive);
    }
    let (t_lo, t_hi) = (gs.rotation.apply(h_lo), gs.rotation.apply(h_hi));
    let (g_lo, g_hi) = gs.h_bracket(m.apply(x), POSITION_FUZZ);
    let gap = (t_lo.max(g_lo) - t_hi.min(g_hi)).max(0.0);
    Ok(ResidualCheck::Measured(gap))
}

/// Total length of the gaps whose points fall in `[0, 1 - alpha)`; this
/// reconstructs the breakpoint `b (1 - delta)` of the normalized map.
pub fn breakpoint_from_gaps(gs: &GapSystem) -> f64 {
    let cut = gs.rotation.cut();
    gs.entries
        .iter()
        .filter(|e| e.point < cut)
        .map(|e| e.length)
        .collect::<CompensatedSum>()
        .value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPrediction {
    pub interval: (f64, f64),
    pub predicted: f64,
    pub truncation_error: f64,
}

/// Visit frequency of a balance interval predicted by unique ergodicity of
/// the rotation: the length of `h(L(J))`, with `J` clipped to `K`.
pub fn predict_frequency(
    gs: &GapSystem,
    c: &ChaoticConfig,
    interval: (f64, f64),
) -> FrequencyPrediction {
    let (k_lo, k_hi) = c.invariant_interval();
    let lo = interval.0.max(k_lo);
    let hi = interval.1.min(k_hi);
    if !(lo <= hi) {
        return FrequencyPrediction {
            interval,
            predicted: 0.0,
            truncation_error: 0.0,
        };
    }
    // endpoints of K land on 0 and 1 up to rounding in L
    let snap = |u: f64| {
        if u <= POSITION_FUZZ {
            0.0
        } else if u >= 1.0 - POSITION_FUZZ {
            1.0
        } else {
            u
        }
    };
    let u_lo = snap(c.conjugacy(lo));
    let u_hi = snap(c.conjugacy(hi));
    // truncated gaps sit left of the true ones by at most the tail mass
    let spread = |u: f64| gs.h(u + POSITION_FUZZ) - gs.h(u - gs.resolution());
    let predicted = (gs.h(u_hi) - gs.h(u_lo)).clamp(0.0, 1.0);
    FrequencyPrediction {
        interval,
        predicted,
        truncation_error: 2.0 * gs.tail_mass() + spread(u_lo) + spread(u_hi),
    }
}
