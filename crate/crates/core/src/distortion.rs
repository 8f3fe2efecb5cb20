//! Distortion calculus for compositions of contractions.
//!
//! `Q(n)` collects the worst log condition number of composed Jacobians up
//! to depth `n` (the non-conformality penalty); `D(n)` the worst `|ln ‖C_n‖|`
//! where `C_n = (Df_w|x)^{-1} (Df_w|y)` compares the Jacobian at two base
//! points. Affine systems have `D ≡ 0` exactly and 1-D systems `Q ≡ 0`
//! exactly; those paths skip enumeration. Everything sampled carries the
//! sampling metadata and an exhaustive flag per depth.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{FractalError, Result};
use crate::geometry::{unit_ball_net, Ball};
use crate::ifs::{ComposedMap, System, Word};
use crate::linalg::{line_fit, singular_range, Pt};
use crate::sampling::{visit_words, Sampling};

/// Relative floor under which a composed Jacobian counts as singular.
const SING_RATIO: f64 = 1e-14;

/// Suprema over the ball use nets no finer than this per dimension, so the
/// per-word state stays affordable.
fn net_eps_for(dim: usize, base: f64) -> f64 {
    match dim {
        1 => base,
        2 => base.max(0.04),
        _ => base.max(0.12),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportConstants {
    pub k: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    /// Explicit Theorem-4.2 constant `H_alpha * sup ‖(Df)^{-1}‖`.
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "H_alpha")]
    pub h_alpha: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SamplingMeta {
    pub seed: u64,
    pub net_eps: f64,
    /// Total words visited across depths.
    pub words: u64,
}

/// Q and D up to a depth, with per-depth exhaustiveness.
#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub n_max: u32,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub exhaustive: Vec<bool>,
    pub constants: ReportConstants,
    pub sampling: SamplingMeta,
}

impl DistortionReport {
    /// `Q(j)` with `Q(0) = 0`.
    pub fn q_at(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.q[j - 1]
        }
    }

    /// `D(j)` with `D(0) = 0`.
    pub fn d_at(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.d[j - 1]
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Log condition number of the composed Jacobian at `x`.
pub fn cond_log(system: &System, word: &Word, x: &Pt) -> Result<f64> {
    if word.is_empty() {
        return Err(FractalError::Domain("cond_log needs a nonempty word".into()));
    }
    let j = system.compose(word).jacobian(x);
    cond_log_of(&j)
}

fn cond_log_of(j: &DMatrix<f64>) -> Result<f64> {
    let (hi, lo) = singular_range(j);
    if lo < SING_RATIO * hi || lo == 0.0 {
        return Err(FractalError::Singular(format!(
            "sigma_min {lo:.3e} below {SING_RATIO:.0e} * sigma_max {hi:.3e}"
        )));
    }
    Ok((hi / lo).ln())
}

/// The distortion matrix `C = (Df_w|x0)^{-1} (Df_w|y0)`; the identity for
/// affine systems and whenever `x0 = y0`.
pub fn c_matrix(system: &System, word: &Word, x0: &Pt, y0: &Pt) -> Result<DMatrix<f64>> {
    let comp = system.compose(word);
    let jx = comp.jacobian(x0);
    let (hi, lo) = singular_range(&jx);
    if lo < SING_RATIO * hi || lo == 0.0 {
        return Err(FractalError::Singular("Jacobian at x0".into()));
    }
    let inv = jx
        .try_inverse()
        .ok_or_else(|| FractalError::Singular("Jacobian at x0".into()))?;
    Ok(inv * comp.jacobian(y0))
}

/// Per-depth supremum of the log condition number, turned into the
/// cumulative `Q(1..=n)`. Returns the per-depth exhaustive flags and the
/// number of words visited.
fn q_values(system: &System, n: u32, sampling: &Sampling) -> Result<(Vec<f64>, Vec<bool>, u64)> {
    let n = n as usize;
    if system.dim() == 1 {
        // scalars have condition number 1
        return Ok((vec![0.0; n], vec![true; n], 0));
    }
    let mut per_len = vec![0.0f64; n];
    let mut exhaustive = vec![true; n];
    let mut words = 0u64;

    if system.is_affine() {
        let m = system.len() as u64;
        let mut total = 0u64;
        let mut c = 1u64;
        for _ in 0..n {
            c = c.saturating_mul(m);
            total = total.saturating_add(c);
        }
        if total > sampling.word_cap {
            return Err(FractalError::CapExceeded(format!(
                "{total} affine words exceed the cap {}; lower n below {n}",
                sampling.word_cap
            )));
        }
        // depth-first over append-on-the-left products A_g * P
        fn rec(
            system: &System,
            depth: usize,
            n: usize,
            prod: &DMatrix<f64>,
            per_len: &mut [f64],
            words: &mut u64,
        ) -> Result<()> {
            if depth == n {
                return Ok(());
            }
            for map in system.maps() {
                let p = map.matrix() * prod;
                *words += 1;
                let c = cond_log_of(&p)?;
                if c > per_len[depth] {
                    per_len[depth] = c;
                }
                rec(system, depth + 1, n, &p, per_len, words)?;
            }
            Ok(())
        }
        let id = DMatrix::identity(system.dim(), system.dim());
        rec(system, 0, n, &id, &mut per_len, &mut words)?;
    } else {
        let eps = net_eps_for(system.dim(), sampling.net_eps);
        let net = unit_ball_net(system.dim(), eps);
        let m = system.len() as u64;
        // exhaust words while the cumulative budget lasts, sample beyond
        let mut budget = sampling.word_cap;
        let mut dmax_exh = 0usize;
        let mut c = 1u64;
        for i in 0..n {
            c = c.saturating_mul(m);
            if c <= budget {
                budget -= c;
                dmax_exh = i + 1;
            } else {
                break;
            }
        }
        type State = (Pt, DMatrix<f64>);
        fn rec(
            system: &System,
            depth: usize,
            dmax: usize,
            states: &[State],
            per_len: &mut [f64],
            words: &mut u64,
        ) -> Result<()> {
            if depth == dmax {
                return Ok(());
            }
            for map in system.maps() {
                let next: Vec<State> = states
                    .iter()
                    .map(|(y, j)| (map.eval(*y), map.jacobian(y) * j))
                    .collect();
                *words += 1;
                for (_, j) in &next {
                    let cl = cond_log_of(j)?;
                    if cl > per_len[depth] {
                        per_len[depth] = cl;
                    }
                }
                rec(system, depth + 1, dmax, &next, per_len, words)?;
            }
            Ok(())
        }
        let dim = system.dim();
        let init: Vec<State> = net
            .points()
            .iter()
            .map(|p| (*p, DMatrix::identity(dim, dim)))
            .collect();
        rec(system, 0, dmax_exh, &init, &mut per_len, &mut words)?;
        let mut rng = sampling.rng(0xA0);
        for len in (dmax_exh + 1)..=n {
            visit_words(
                system.len(),
                len,
                0,
                sampling.sampled_words,
                &mut rng,
                |w| {
                    words += 1;
                    let word = Word::from_indices_unchecked(w.to_vec());
                    let comp = system.compose(&word);
                    for p in net.points() {
                        if let Ok(c) = cond_log_of(&comp.jacobian(p)) {
                            if c > per_len[len - 1] {
                                per_len[len - 1] = c;
                            }
                        }
                    }
                },
            );
        }
        // the x-net makes every perturbed entry a lower estimate
        exhaustive = vec![false; n];
    }

    // Q is the running maximum over depths
    let mut q = per_len;
    for i in 1..q.len() {
        if q[i] < q[i - 1] {
            q[i] = q[i - 1];
        }
    }
    for i in 1..exhaustive.len() {
        exhaustive[i] = exhaustive[i] && exhaustive[i - 1];
    }
    Ok((q, exhaustive, words))
}

/// Per-depth supremum of `|ln ‖C_i‖|` over words and base-point pairs,
/// cumulative in `i`. Exact zero for affine systems.
fn d_values(system: &System, n: u32, sampling: &Sampling) -> Result<(Vec<f64>, Vec<bool>, u64)> {
    let n = n as usize;
    if system.is_affine() {
        return Ok((vec![0.0; n], vec![true; n], 0));
    }
    let dim = system.dim();
    let eps = net_eps_for(dim, sampling.net_eps);
    let net = unit_ball_net(dim, eps);
    let mut per_len = vec![0.0f64; n];
    let mut words = 0u64;

    let m = system.len() as u64;
    let mut budget = sampling.word_cap;
    let mut rng = sampling.rng(0xD0 as u64);
    for len in 1..=n {
        let count = (m as f64).powi(len as i32);
        let exhaustive_len = count <= budget as f64;
        if exhaustive_len {
            budget -= count as u64;
        }
        let mut eval_word = |w: &[usize]| {
            words += 1;
            let word = Word::from_indices_unchecked(w.to_vec());
            let comp = system.compose(&word);
            if dim == 1 {
                // 1-D: sup over pairs of |ln J(y)/J(x)| = spread of ln |J|
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in net.points() {
                    let j = comp.jacobian(p)[(0, 0)].abs();
                    if j > 0.0 {
                        lo = lo.min(j.ln());
                        hi = hi.max(j.ln());
                    }
                }
                if hi >= lo {
                    per_len[len - 1] = per_len[len - 1].max(hi - lo);
                }
            } else {
                let mut pair_rng = sampling.rng(0xD1 ^ (words << 8));
                for _ in 0..sampling.sampled_pairs {
                    use rand::Rng;
                    let x = net.points()[pair_rng.gen_range(0..net.len())];
                    let y = net.points()[pair_rng.gen_range(0..net.len())];
                    if let Ok(c) = c_matrix(system, &word, &x, &y) {
                        let norm = crate::linalg::op_norm(&c);
                        if norm > 0.0 {
                            per_len[len - 1] = per_len[len - 1].max(norm.ln().abs());
                        }
                    }
                }
            }
        };
        if exhaustive_len {
            visit_words(system.len(), len, u64::MAX, 0, &mut rng, &mut eval_word);
        } else {
            visit_words(system.len(), len, 0, sampling.sampled_words, &mut rng, &mut eval_word);
        }
    }

    let mut d = per_len;
    for i in 1..d.len() {
        if d[i] < d[i - 1] {
            d[i] = d[i - 1];
        }
    }
    // point sampling makes perturbed entries lower estimates
    Ok((d, vec![false; n], words))
}

/// Build the full report: `Q`, `D`, the explicit Theorem-4.2 constant and
/// the Eq.-(5.1) contraction constants.
pub fn distortion_report(system: &System, n: u32, sampling: &Sampling) -> Result<DistortionReport> {
    if n < 1 {
        return Err(FractalError::Domain("depth must be at least 1".into()));
    }
    let (q, ex_q, words_q) = q_values(system, n, sampling)?;
    let (d, ex_d, words_d) = d_values(system, n, sampling)?;
    let exhaustive: Vec<bool> = ex_q.iter().zip(&ex_d).map(|(a, b)| a & b).collect();
    let cc = crate::cover::contraction_constants(system);
    Ok(DistortionReport {
        n_max: n,
        q,
        d,
        exhaustive,
        constants: ReportConstants {
            k: cc.k,
            big_k: cc.big_k,
            c: system.holder_const() * system.inv_norm_sup(),
            h_alpha: system.holder_const(),
            alpha: system.alpha(),
        },
        sampling: SamplingMeta {
            seed: sampling.seed,
            net_eps: net_eps_for(system.dim(), sampling.net_eps),
            words: words_q + words_d,
        },
    })
}

/// The orbit data Theorem 4.2 consumes: a tracked ball, two base points in
/// it, and upper bounds on the diameters `|B_0| .. |B_{n-1}|`.
#[derive(Clone, Debug)]
pub struct CompositionTrace {
    pub word: Word,
    pub x0: Pt,
    pub y0: Pt,
    pub diameters: Vec<f64>,
}

pub fn trace_ball(
    system: &System,
    word: &Word,
    ball: &Ball,
    x0: Pt,
    y0: Pt,
) -> Result<CompositionTrace> {
    if word.is_empty() {
        return Err(FractalError::Domain("trace needs a nonempty word".into()));
    }
    let r = ball.radius;
    if x0.dist(&ball.center) > r + 1e-12 || y0.dist(&ball.center) > r + 1e-12 {
        return Err(FractalError::Precondition(
            "base points must lie in the tracked ball".into(),
        ));
    }
    let n = word.len();
    let mut diameters = Vec::with_capacity(n);
    diameters.push(2.0 * r);
    if system.is_affine() {
        let dim = system.dim();
        let mut prod = DMatrix::<f64>::identity(dim, dim);
        for &i in word.indices().iter().take(n - 1) {
            prod = system.map(i).matrix() * prod;
            let (smax, _) = singular_range(&prod);
            diameters.push(2.0 * r * smax);
        }
    } else {
        let mut d = 2.0 * r;
        for &i in word.indices().iter().take(n - 1) {
            d *= system.map(i).lipschitz();
            diameters.push(d);
        }
    }
    Ok(CompositionTrace {
        word: word.clone(),
        x0,
        y0,
        diameters,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Theorem 4.2 instantiated with the explicit constant
/// `C = H_alpha * sup ‖(Df)^{-1}‖`:
/// `|ln |C_n v|| ≤ C Σ_{j=0}^{n-1} e^{Q(j)} |B_j|^α`.
///
/// The sum pairs `Q(j)` with `|B_j|`, which is what the product expansion
/// proves; the printed statement's `|B_{j-1}|` would make the j = 0 term
/// undefined.
pub fn verify_distortion_bound(
    system: &System,
    trace: &CompositionTrace,
    v: &Pt,
    report: &DistortionReport,
) -> Result<BoundCheck> {
    let n = trace.word.len();
    if (report.n_max as usize) < n.saturating_sub(1) {
        return Err(FractalError::Precondition(format!(
            "report depth {} below word length {} - 1",
            report.n_max, n
        )));
    }
    let c = c_matrix(system, &trace.word, &trace.x0, &trace.y0)?;
    let vn = v.norm();
    if vn == 0.0 {
        return Err(FractalError::Domain("direction must be nonzero".into()));
    }
    let mut cv = [0.0f64; 3];
    for r in 0..system.dim() {
        for col in 0..system.dim() {
            cv[r] += c[(r, col)] * v.c[col] / vn;
        }
    }
    let len = Pt::new(system.dim(), cv).norm();
    let lhs = len.ln().abs();
    let big_c = system.holder_const() * system.inv_norm_sup();
    let alpha = system.alpha();
    let rhs: f64 = trace
        .diameters
        .iter()
        .enumerate()
        .map(|(j, b)| report.q_at(j).exp() * b.powf(alpha))
        .sum::<f64>()
        * big_c;
    Ok(BoundCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-12,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingCheck {
    pub lhs: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

fn image_diameter_bracket(
    system: &System,
    word: &Word,
    ball: &Ball,
    sampling: &Sampling,
) -> (f64, f64) {
    if word.is_empty() {
        return (ball.diameter(), ball.diameter());
    }
    if system.is_affine() {
        let comp = system.compose(word);
        let (a, _) = comp.affine_product().expect("affine system");
        let (smax, _) = singular_range(&a);
        let d = ball.diameter() * smax;
        return (d, d);
    }
    // upper bound from Lipschitz products, lower bound from a sampled hull
    let comp = system.compose(word);
    let hi = ball.diameter() * comp.lipschitz_product();
    let net = unit_ball_net(system.dim(), net_eps_for(system.dim(), sampling.net_eps * 4.0));
    let pts: Vec<Pt> = net
        .points()
        .iter()
        .map(|u| {
            let mut x = ball.center;
            for ax in 0..system.dim() {
                x.c[ax] += ball.radius * u.c[ax];
            }
            comp.eval(x)
        })
        .collect();
    let mut lo = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            lo = lo.max(pts[i].dist(&pts[j]));
        }
    }
    (lo, hi)
}

/// Theorem 4.9: `|ln(|f_a f_b(B)|/|f_a(B)| * |B|/|f_b(B)|)| ≤ 2Q(n)+2D(n)`.
pub fn verify_scaling(
    system: &System,
    wa: &Word,
    wb: &Word,
    ball: &Ball,
    report: &DistortionReport,
    sampling: &Sampling,
) -> Result<ScalingCheck> {
    let n = wa.len().max(wb.len());
    if n > report.n_max as usize {
        return Err(FractalError::Precondition(format!(
            "Q, D computed to depth {} but words reach {}",
            report.n_max, n
        )));
    }
    let wab = wb.then(wa); // f_a ∘ f_b
    let (ab_lo, ab_hi) = image_diameter_bracket(system, &wab, ball, sampling);
    let (a_lo, a_hi) = image_diameter_bracket(system, wa, ball, sampling);
    let (b_lo, b_hi) = image_diameter_bracket(system, wb, ball, sampling);
    let db = ball.diameter();
    let ratio_mid = (ab_hi.min(ab_lo.max(ab_hi * 0.5)).max(ab_lo) / a_hi) * (db / b_hi);
    let ratio_lo = (ab_lo / a_hi) * (db / b_hi);
    let ratio_hi = (ab_hi / a_lo.max(1e-300)) * (db / b_lo.max(1e-300));
    let lhs = ratio_mid.ln().abs();
    // the true ratio lies in [ratio_lo, ratio_hi]; slack covers the spread
    let slack = (ratio_hi.ln() - ratio_lo.ln()).abs() * 0.5;
    let bound = 2.0 * report.q_at(n) + 2.0 * report.d_at(n);
    let best_lhs = if ratio_lo <= 1.0 && 1.0 <= ratio_hi {
        0.0
    } else {
        ratio_lo.ln().abs().min(ratio_hi.ln().abs())
    };
    Ok(ScalingCheck {
        lhs,
        bound,
        slack,
        pass: best_lhs <= bound + 1e-12,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanValueCheck {
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub dmin: f64,
    pub dmax: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Hölder data of a composition, folded along the word (first letter first):
/// `L' = L_g L`, `H' = H_g L^2 + L_g H`.
pub fn word_holder_bound(system: &System, word: &Word) -> (f64, f64) {
    let mut l = 1.0f64;
    let mut h = 0.0f64;
    for &i in word.indices() {
        let m = system.map(i);
        h = m.holder_const() * l * l + m.lipschitz() * h;
        l *= m.lipschitz();
    }
    (l, h)
}

/// Mean-value corollary: the diameter ratio `|g(A)|/|A|` is attained by a
/// directional derivative, so it must lie within the sampled range of
/// `|Dg|_x v|/|v|` (plus net slack).
pub fn mean_value_check(
    system: &System,
    word: &Word,
    ball: &Ball,
    sampling: &Sampling,
) -> Result<MeanValueCheck> {
    let dim = system.dim();
    if system.is_affine() {
        let comp = system.compose(word);
        let dimn = dim;
        let prod = comp
            .affine_product()
            .map(|(a, _)| a)
            .unwrap_or_else(|| DMatrix::identity(dimn, dimn));
        let (smax, smin) = singular_range(&prod);
        let ratio = smax; // ball ↦ ellipsoid with diameter 2 σ_max r
        return Ok(MeanValueCheck {
            ratio_lo: ratio,
            ratio_hi: ratio,
            dmin: smin,
            dmax: smax,
            slack: 1e-12,
            pass: smin - 1e-12 <= ratio && ratio <= smax + 1e-12,
        });
    }
    let comp = system.compose(word);
    let (ratio_lo_d, ratio_hi_d) = image_diameter_bracket(system, word, ball, sampling);
    let ratio_lo = ratio_lo_d / ball.diameter();
    let ratio_hi = ratio_hi_d / ball.diameter();
    let eps_x = net_eps_for(dim, sampling.net_eps) * ball.radius;
    let net = unit_ball_net(dim, net_eps_for(dim, sampling.net_eps));
    let dirs = direction_net(dim, 64);
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for u in net.points() {
        let mut x = ball.center;
        for ax in 0..dim {
            x.c[ax] += ball.radius * u.c[ax];
        }
        let j = comp.jacobian(&x);
        for v in &dirs {
            let mut jv = [0.0f64; 3];
            for r in 0..dim {
                for c in 0..dim {
                    jv[r] += j[(r, c)] * v.c[c];
                }
            }
            let len = Pt::new(dim, jv).norm();
            dmin = dmin.min(len);
            dmax = dmax.max(len);
        }
    }
    let (lw, hw) = word_holder_bound(system, word);
    let slack = hw * eps_x + lw * (4.0 / 64.0) + 1e-12;
    let pass = dmin - slack <= ratio_hi && ratio_lo <= dmax + slack;
    Ok(MeanValueCheck {
        ratio_lo,
        ratio_hi,
        dmin,
        dmax,
        slack,
        pass,
    })
}

/// Unit directions: ±1 in 1-D, a uniform circle net in 2-D, a lat-long net
/// in 3-D. Chord spacing is at most ~4/m.
pub fn direction_net(dim: usize, m: usize) -> Vec<Pt> {
    match dim {
        1 => vec![Pt::new(1, [1.0, 0.0, 0.0]), Pt::new(1, [-1.0, 0.0, 0.0])],
        2 => (0..m)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                Pt::new(2, [th.cos(), th.sin(), 0.0])
            })
            .collect(),
        _ => {
            let mut out = Vec::new();
            let rows = m / 4;
            for r in 0..=rows {
                let phi = std::f64::consts::PI * r as f64 / rows as f64;
                let circ = ((m as f64 * phi.sin()).ceil() as usize).max(1);
                for i in 0..circ {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / circ as f64;
                    out.push(Pt::new(
                        3,
                        [phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()],
                    ));
                }
            }
            out
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConformalityVerdict {
    /// All sampled Q(n) vanish.
    Conformal,
    /// Q(n)/n trends downward.
    Decreasing,
    /// Q(n)/n sits flat at a positive value: not semi-conformal at this depth.
    FlatPositive,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SemiConformality {
    /// `Q(n)/n` for n = 1..=n_max.
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub verdict: ConformalityVerdict,
}

const SLOPE_THRESHOLD: f64 = 1e-3;

/// Empirical classification of `Q(n)/n -> 0`; a diagnostic, never a proof.
pub fn semi_conformality_diagnostic(
    system: &System,
    n_max: u32,
    sampling: &Sampling,
) -> Result<SemiConformality> {
    if n_max < 2 {
        return Err(FractalError::Domain("diagnostic needs n_max >= 2".into()));
    }
    let (q, _, _) = q_values(system, n_max, sampling)?;
    let ratios: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(i, v)| v / (i + 1) as f64)
        .collect();
    let xs: Vec<f64> = (1..=ratios.len()).map(|i| i as f64).collect();
    let (slope, _, _) = line_fit(&xs, &ratios);
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let last = *ratios.last().unwrap();
    let verdict = if max_ratio <= 1e-9 {
        ConformalityVerdict::Conformal
    } else if slope < -SLOPE_THRESHOLD {
        ConformalityVerdict::Decreasing
    } else if slope.abs() <= SLOPE_THRESHOLD && last > SLOPE_THRESHOLD {
        ConformalityVerdict::FlatPositive
    } else {
        ConformalityVerdict::Inconclusive
    };
    Ok(SemiConformality {
        ratios,
        slope,
        verdict,
    })
}
