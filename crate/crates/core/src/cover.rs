//! Dynamic covers of the attractor, maximal disjoint subsystems and
//! open-set-condition certificates.
//!
//! A dynamic cover at level `n` consists of word-images `f_w(I)` whose
//! diameters fall in the window `[2e^{-2Q-2D-K-nk}, 2e^{-nk})`. It is built
//! exactly as in the existence proof: start from single letters and keep
//! prepending generators (the new letter acts first) until the upper bound
//! is met; the lower bound is asserted afterwards, since it is a consequence
//! of the distortion constants rather than a construction step.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::distortion::DistortionReport;
use crate::error::{FractalError, Result};
use crate::ifs::{AttractorGrid, ContractionMap, System, Word};
use crate::linalg::{singular_range, Pt};
use crate::sampling::Sampling;

/// Default margin factor for the strict inequalities of the contraction
/// constants; `1.0` gives the zero-slack constants used by closed-form tests.
pub const DEFAULT_SLACK: f64 = 1.01;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContractionConstants {
    pub k: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    /// Margin factor applied on both sides; > 1 makes the inequalities strict.
    pub slack: f64,
}

impl ContractionConstants {
    pub fn with_slack(system: &System, slack: f64) -> Result<Self> {
        assert!(slack >= 1.0);
        let sup = system.lipschitz();
        let inf = system.jac_inf();
        let k = -(slack * sup).ln();
        let big_k = -(inf / slack).ln();
        if k <= 0.0 {
            return Err(FractalError::Domain(format!(
                "slack {slack} pushes e^-k = {:.6} past 1",
                slack * sup
            )));
        }
        debug_assert!(k <= big_k + 1e-12);
        Ok(ContractionConstants { k, big_k, slack })
    }

    /// Zero-slack constants injected directly (closed-form test fixtures).
    pub fn exact(k: f64, big_k: f64) -> Self {
        ContractionConstants {
            k,
            big_k,
            slack: 1.0,
        }
    }

    /// The strict inequalities `σ_max < e^-k`, `σ_min > e^-K` on the
    /// certified per-map bounds. With slack 1.0 they hold only weakly.
    pub fn strict_for(&self, system: &System) -> bool {
        system.lipschitz() < (-self.k).exp() && system.jac_inf() > (-self.big_k).exp()
    }
}

/// `k = -ln(s σ_max)`, `K = -ln(σ_min / s)` with the default margin, so the
/// strict inequalities hold for every map and point.
pub fn contraction_constants(system: &System) -> ContractionConstants {
    ContractionConstants::with_slack(system, DEFAULT_SLACK)
        .expect("certified systems have s*L < 1 at the default slack")
}

/// Diameter bracket of a word-image of the unit ball. Affine products are
/// exact; perturbed words report `[sampled hull, Lipschitz product]`.
pub fn image_diameter(system: &System, word: &Word) -> (f64, f64) {
    if word.is_empty() {
        return (2.0, 2.0);
    }
    if system.is_affine() {
        let (a, _) = system
            .compose(word)
            .affine_product()
            .expect("affine system");
        let (smax, _) = singular_range(&a);
        return (2.0 * smax, 2.0 * smax);
    }
    let comp = system.compose(word);
    let hi = 2.0 * comp.lipschitz_product();
    let net = crate::geometry::unit_ball_net(system.dim(), 0.25);
    let pts: Vec<Pt> = net.points().iter().map(|p| comp.eval(*p)).collect();
    let mut lo = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            lo = lo.max(pts[i].dist(&pts[j]));
        }
    }
    (lo, hi)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverWord {
    pub indices: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug)]
pub struct DynamicCover {
    pub n: u32,
    pub constants: ContractionConstants,
    pub q_n: f64,
    pub d_n: f64,
    pub words: Vec<CoverWord>,
    /// Words whose certified lower diameter bound undercuts the window;
    /// nonzero values indicate inconsistent distortion constants.
    pub lower_window_violations: usize,
    pub max_word_len: usize,
}

impl DynamicCover {
    pub fn upper_window(&self) -> f64 {
        2.0 * (-(self.n as f64) * self.constants.k).exp()
    }

    pub fn lower_window(&self) -> f64 {
        2.0 * (-2.0 * self.q_n - 2.0 * self.d_n - self.constants.big_k
            - self.n as f64 * self.constants.k)
            .exp()
    }
}

pub const FRONTIER_CAP: usize = 1_000_000;

/// Breadth-first refinement: a word whose image is still too large is
/// replaced by its one-letter extensions (new letter acting first).
pub fn build_dynamic_cover(
    system: &System,
    n: u32,
    constants: &ContractionConstants,
    report: &DistortionReport,
) -> Result<DynamicCover> {
    if n < 1 {
        return Err(FractalError::Domain("cover level must be >= 1".into()));
    }
    if (report.n_max as usize) < n as usize {
        return Err(FractalError::Precondition(
            "distortion report shallower than the cover level".into(),
        ));
    }
    let q_n = report.q_at(n as usize);
    let d_n = report.d_at(n as usize);
    let upper = 2.0 * (-(n as f64) * constants.k).exp();
    let lower =
        2.0 * (-2.0 * q_n - 2.0 * d_n - constants.big_k - n as f64 * constants.k).exp();

    let affine = system.is_affine();
    struct Item {
        word: Word,
        prod: Option<DMatrix<f64>>,
        lip: f64,
    }
    let mut frontier: VecDeque<Item> = VecDeque::new();
    for g in 0..system.len() {
        let word = Word::from_indices_unchecked(vec![g]);
        let prod = affine.then(|| system.map(g).matrix().clone());
        frontier.push_back(Item {
            word,
            prod,
            lip: system.map(g).lipschitz(),
        });
    }
    let mut words: Vec<CoverWord> = Vec::new();
    let mut violations = 0usize;
    let mut max_len = 0usize;
    while let Some(item) = frontier.pop_front() {
        if words.len() + frontier.len() > FRONTIER_CAP {
            return Err(FractalError::CapExceeded(format!(
                "dynamic cover frontier exceeded {FRONTIER_CAP} words"
            )));
        }
        let (lo, hi) = match &item.prod {
            Some(p) => {
                let (smax, _) = singular_range(p);
                (2.0 * smax, 2.0 * smax)
            }
            None => image_diameter(system, &item.word),
        };
        if hi < upper {
            if lo < lower - 1e-12 {
                violations += 1;
            }
            max_len = max_len.max(item.word.len());
            words.push(CoverWord {
                indices: item.word.indices().to_vec(),
                lo,
                hi,
            });
            continue;
        }
        for g in 0..system.len() {
            let word = item.word.precomposed_with(g);
            let prod = item
                .prod
                .as_ref()
                .map(|p| p * system.map(g).matrix());
            frontier.push_back(Item {
                word,
                prod,
                lip: item.lip * system.map(g).lipschitz(),
            });
        }
    }
    words.sort_by(|a, b| a.indices.cmp(&b.indices));
    Ok(DynamicCover {
        n,
        constants: *constants,
        q_n,
        d_n,
        words,
        lower_window_violations: violations,
        max_word_len: max_len,
    })
}

/// Certified geometric relation between two word images.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Relation {
    Disjoint,
    Intersecting,
    Ambiguous,
}

const GEOM_TOL: f64 = 1e-12;

/// Closed-image enclosure of a word: exact interval in 1-D, a parallelotope
/// around the image of the bounding cube for affine n-D, an interval box
/// for perturbed n-D.
#[derive(Clone, Debug)]
enum Enclosure {
    Interval {
        lo: f64,
        hi: f64,
    },
    Parallelotope {
        center: [f64; 3],
        half_edges: [[f64; 3]; 3],
        inner_radius: f64,
    },
    IntervalBox {
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

fn word_enclosure(system: &System, word: &Word) -> Enclosure {
    let dim = system.dim();
    if dim == 1 {
        let mut lo = -1.0;
        let mut hi = 1.0;
        for &i in word.indices() {
            let (a, b) = system.map(i).interval_image(lo, hi);
            lo = a;
            hi = b;
        }
        return Enclosure::Interval { lo, hi };
    }
    if system.is_affine() {
        let comp = system.compose(word);
        let (a, b) = comp.affine_product().expect("affine system");
        let mut center = [0.0f64; 3];
        for r in 0..dim {
            center[r] = b[r];
        }
        let mut half_edges = [[0.0f64; 3]; 3];
        for (c, he) in half_edges.iter_mut().enumerate().take(dim) {
            for r in 0..dim {
                he[r] = a[(r, c)];
            }
        }
        let (_, smin) = singular_range(&a);
        return Enclosure::Parallelotope {
            center,
            half_edges,
            inner_radius: smin,
        };
    }
    // interval-arithmetic box through the composition
    let mut lo = [-1.0f64; 3];
    let mut hi = [1.0f64; 3];
    for &i in word.indices() {
        let (nl, nh) = map_box(system.map(i), &lo, &hi, dim);
        lo = nl;
        hi = nh;
    }
    Enclosure::IntervalBox { lo, hi }
}

/// Conservative interval image of an axis box under one map.
fn map_box(
    map: &ContractionMap,
    lo: &[f64; 3],
    hi: &[f64; 3],
    dim: usize,
) -> ([f64; 3], [f64; 3]) {
    // affine part exactly, polynomial part via the Lipschitz bound around
    // the box center
    let mut center = Pt::zero(dim);
    let mut rad = 0.0f64;
    for ax in 0..dim {
        center.c[ax] = 0.5 * (lo[ax] + hi[ax]);
        rad = rad.max(0.5 * (hi[ax] - lo[ax]));
    }
    let rad = rad * (dim as f64).sqrt();
    let fc = map.eval(center);
    let reach = map.lipschitz() * rad;
    let mut out_lo = [0.0f64; 3];
    let mut out_hi = [0.0f64; 3];
    for ax in 0..dim {
        out_lo[ax] = fc.c[ax] - reach;
        out_hi[ax] = fc.c[ax] + reach;
    }
    (out_lo, out_hi)
}

fn relate(a: &Enclosure, b: &Enclosure, dim: usize) -> Relation {
    match (a, b) {
        (Enclosure::Interval { lo: a0, hi: a1 }, Enclosure::Interval { lo: b0, hi: b1 }) => {
            let gap = (b0 - a1).max(a0 - b1);
            if gap > GEOM_TOL {
                Relation::Disjoint
            } else if gap < -GEOM_TOL {
                Relation::Intersecting
            } else {
                Relation::Ambiguous
            }
        }
        (
            Enclosure::Parallelotope {
                center: c1,
                half_edges: e1,
                inner_radius: r1,
            },
            Enclosure::Parallelotope {
                center: c2,
                half_edges: e2,
                inner_radius: r2,
            },
        ) => {
            if parallelotopes_separated(dim, c1, e1, c2, e2, GEOM_TOL) {
                return Relation::Disjoint;
            }
            let d: f64 = (0..dim)
                .map(|i| (c1[i] - c2[i]) * (c1[i] - c2[i]))
                .sum::<f64>()
                .sqrt();
            if d < r1 + r2 - GEOM_TOL {
                Relation::Intersecting
            } else {
                Relation::Ambiguous
            }
        }
        (Enclosure::IntervalBox { lo: a0, hi: a1 }, Enclosure::IntervalBox { lo: b0, hi: b1 }) => {
            let mut gap = f64::NEG_INFINITY;
            for ax in 0..dim {
                gap = gap.max((b0[ax] - a1[ax]).max(a0[ax] - b1[ax]));
            }
            if gap > GEOM_TOL {
                Relation::Disjoint
            } else {
                // boxes over-approximate, an overlap proves nothing
                Relation::Ambiguous
            }
        }
        _ => Relation::Ambiguous,
    }
}

/// Separating-axis test between two parallelotopes (half-edge form) with a
/// required margin.
fn parallelotopes_separated(
    dim: usize,
    c1: &[f64; 3],
    e1: &[[f64; 3]; 3],
    c2: &[f64; 3],
    e2: &[[f64; 3]; 3],
    margin: f64,
) -> bool {
    let mut axes: Vec<[f64; 3]> = Vec::with_capacity(15);
    match dim {
        2 => {
            for e in e1.iter().take(2).chain(e2.iter().take(2)) {
                axes.push([-e[1], e[0], 0.0]);
            }
        }
        3 => {
            for es in [e1, e2] {
                for i in 0..3 {
                    axes.push(cross3(&es[i], &es[(i + 1) % 3]));
                }
            }
            for a in e1.iter().take(3) {
                for b in e2.iter().take(3) {
                    axes.push(cross3(a, b));
                }
            }
        }
        _ => unreachable!("1-D uses exact intervals"),
    }
    for a in &axes {
        let len: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len < 1e-30 {
            continue;
        }
        let dot = |v: &[f64; 3]| (0..dim).map(|i| v[i] * a[i]).sum::<f64>();
        let r1: f64 = e1.iter().take(dim).map(|e| dot(e).abs()).sum();
        let r2: f64 = e2.iter().take(dim).map(|e| dot(e).abs()).sum();
        if (dot(c1) - dot(c2)).abs() > r1 + r2 + margin * len {
            return true;
        }
    }
    false
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointSubsystem {
    pub n: u32,
    /// Indices into the cover's word list, in greedy selection order.
    pub selected: Vec<usize>,
    #[serde(rename = "N_n")]
    pub n_n: u64,
    /// Words excluded because disjointness was undecidable within tolerance.
    pub ambiguous: usize,
    pub maximal_verified: bool,
}

/// Greedy scan in lexicographic word order; a word is selected when its
/// closed image enclosure is certifiably disjoint from all previously
/// selected ones. Undecidable words are excluded and counted, keeping the
/// reported count conservative.
pub fn maximal_disjoint(system: &System, cover: &DynamicCover) -> DisjointSubsystem {
    let dim = system.dim();
    let enclosures: Vec<Enclosure> = cover
        .words
        .iter()
        .map(|w| word_enclosure(system, &Word::from_indices_unchecked(w.indices.clone())))
        .collect();
    let mut selected: Vec<usize> = Vec::new();
    let mut ambiguous = 0usize;
    for i in 0..cover.words.len() {
        let mut verdict = Relation::Disjoint;
        for &s in &selected {
            match relate(&enclosures[i], &enclosures[s], dim) {
                Relation::Disjoint => {}
                r => {
                    verdict = r;
                    break;
                }
            }
        }
        match verdict {
            Relation::Disjoint => selected.push(i),
            Relation::Ambiguous => ambiguous += 1,
            Relation::Intersecting => {}
        }
    }
    // maximality: every rejected word must meet (or be unresolvable against)
    // some selected one
    let mut maximal = true;
    for i in 0..cover.words.len() {
        if selected.contains(&i) {
            continue;
        }
        let blocked = selected
            .iter()
            .any(|&s| relate(&enclosures[i], &enclosures[s], dim) != Relation::Disjoint);
        if !blocked {
            maximal = false;
        }
    }
    DisjointSubsystem {
        n: cover.n,
        n_n: selected.len() as u64,
        selected,
        ambiguous,
        maximal_verified: maximal,
    }
}

/// The selected words as a System of composed affine maps.
pub fn subsystem(system: &System, cover: &DynamicCover, dis: &DisjointSubsystem) -> Result<System> {
    if !system.is_affine() {
        return Err(FractalError::Unsupported(
            "composed subsystems are built for affine systems only".into(),
        ));
    }
    let maps = dis
        .selected
        .iter()
        .map(|&i| {
            let word = Word::from_indices_unchecked(cover.words[i].indices.clone());
            let (a, b) = system
                .compose(&word)
                .affine_product()
                .expect("affine system");
            ContractionMap::affine(a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    System::new(maps)
}

/// `|V~| ≤ 4 e^{2Q(n)+2D(n)+K} |V|` for every selected cover member, where
/// `V~` is the ball of radius `4 e^{-nk}` around a tracked point of `V`.
pub fn inflated_ball_check(cover: &DynamicCover, dis: &DisjointSubsystem) -> (bool, f64) {
    let lhs = 8.0 * (-(cover.n as f64) * cover.constants.k).exp();
    let factor =
        4.0 * (2.0 * cover.q_n + 2.0 * cover.d_n + cover.constants.big_k).exp();
    let mut worst = f64::INFINITY;
    for &i in &dis.selected {
        let margin = factor * cover.words[i].lo - lhs;
        worst = worst.min(margin);
    }
    (worst >= -1e-9, worst)
}

/// Every occupied attractor cell must meet some word image, inflated by the
/// stated slacks.
pub fn cover_contains_attractor(
    system: &System,
    cover: &DynamicCover,
    at: &AttractorGrid,
) -> bool {
    let dim = system.dim();
    let slack = at.hd_error + at.grid.half_diag();
    let enclosures: Vec<Enclosure> = cover
        .words
        .iter()
        .map(|w| word_enclosure(system, &Word::from_indices_unchecked(w.indices.clone())))
        .collect();
    at.grid.cells().iter().all(|c| {
        let center = at.grid.cell_center(c);
        enclosures.iter().any(|e| match e {
            Enclosure::Interval { lo, hi } => {
                center.c[0] + slack >= *lo && center.c[0] - slack <= *hi
            }
            Enclosure::Parallelotope {
                center: pc,
                half_edges,
                ..
            } => {
                let mut full_edges = [[0.0f64; 3]; 3];
                for ax in 0..dim {
                    for r in 0..dim {
                        full_edges[ax][r] = 2.0 * half_edges[ax][r];
                    }
                }
                crate::ifs::parallelotope_box_overlap(
                    dim,
                    pc,
                    &full_edges,
                    &center.c,
                    at.grid.half_diag() + slack,
                )
            }
            Enclosure::IntervalBox { lo, hi } => (0..dim).all(|ax| {
                center.c[ax] + slack >= lo[ax] && center.c[ax] - slack <= hi[ax]
            }),
        })
    })
}

/// An open axis box.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoxRegion {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxRegion {
    pub fn new_1d(lo: f64, hi: f64) -> Self {
        BoxRegion {
            lo: [lo, 0.0, 0.0],
            hi: [hi, 0.0, 0.0],
        }
    }

    fn shrunk(&self, dim: usize, delta: f64) -> BoxRegion {
        let mut out = *self;
        for ax in 0..dim {
            out.lo[ax] += delta;
            out.hi[ax] -= delta;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OscReport {
    /// Strict pairwise disjointness of the images of the margin-shrunk box
    /// was proved (and the images stay inside the box closure).
    pub certified: bool,
    /// Images of the unshrunk closed box touch without overlapping.
    pub closure_touching: bool,
    /// The box actually certified (shrunk by the open-set margin).
    pub witness: BoxRegion,
    /// An overlapping pair when certification fails.
    pub overlap_pair: Option<(usize, usize)>,
    /// Smallest certified separation between image enclosures of the
    /// shrunk box (1-D: exact interval gap).
    pub min_separation: f64,
}

/// Margin by which the certified box is shrunk, making the open-set
/// topology explicit in the numerics.
pub const OSC_MARGIN: f64 = 1e-9;

/// Certify the open set condition on `v`: pairwise disjoint images of the
/// shrunk box, with images contained in the box closure. The attractor
/// estimate must sit inside `v` up to its own grid slack.
pub fn check_osc(system: &System, v: &BoxRegion, estimate: &AttractorGrid) -> Result<OscReport> {
    let dim = system.dim();
    for ax in 0..dim {
        if !(v.lo[ax] < v.hi[ax]) {
            return Err(FractalError::Domain("box has empty interior".into()));
        }
    }
    // precondition: estimate inside the closed box, modulo its certified slack
    let tol = estimate.hd_error + estimate.grid.width();
    for c in estimate.grid.cells() {
        let lo = estimate.grid.cell_low(c);
        for ax in 0..dim {
            if lo.c[ax] + estimate.grid.width() > v.hi[ax] + tol || lo.c[ax] < v.lo[ax] - tol {
                return Err(FractalError::Precondition(format!(
                    "attractor estimate leaves the box on axis {ax}"
                )));
            }
        }
    }

    let images = |region: &BoxRegion| -> Vec<(Pt, Pt)> {
        system
            .maps()
            .iter()
            .map(|m| {
                if dim == 1 {
                    let (a, b) = m.interval_image(region.lo[0], region.hi[0]);
                    (Pt::new(1, [a, 0.0, 0.0]), Pt::new(1, [b, 0.0, 0.0]))
                } else {
                    let (lo, hi) = map_box(m, &region.lo, &region.hi, dim);
                    (Pt::new(dim, lo), Pt::new(dim, hi))
                }
            })
            .collect()
    };
    let box_gap = |a: &(Pt, Pt), b: &(Pt, Pt)| -> f64 {
        let mut gap = f64::NEG_INFINITY;
        for ax in 0..dim {
            gap = gap.max((b.0.c[ax] - a.1.c[ax]).max(a.0.c[ax] - b.1.c[ax]));
        }
        gap
    };

    let shrunk = v.shrunk(dim, OSC_MARGIN);
    let imgs = images(&shrunk);
    let mut certified = true;
    let mut min_sep = f64::INFINITY;
    let mut overlap_pair = None;
    for i in 0..imgs.len() {
        for j in (i + 1)..imgs.len() {
            let gap = box_gap(&imgs[i], &imgs[j]);
            min_sep = min_sep.min(gap);
            if gap <= 0.0 {
                certified = false;
                if overlap_pair.is_none() {
                    overlap_pair = Some((i, j));
                }
            }
        }
    }
    // containment half of the certificate
    for img in &imgs {
        for ax in 0..dim {
            if img.0.c[ax] < v.lo[ax] - 1e-12 || img.1.c[ax] > v.hi[ax] + 1e-12 {
                certified = false;
            }
        }
    }
    // closure reading: do unshrunk images touch?
    let full = images(v);
    let mut closure_touching = false;
    for i in 0..full.len() {
        for j in (i + 1)..full.len() {
            let gap = box_gap(&full[i], &full[j]);
            if gap.abs() <= 1e-9 {
                closure_touching = true;
            }
        }
    }
    Ok(OscReport {
        certified,
        closure_touching,
        witness: shrunk,
        overlap_pair,
        min_separation: min_sep,
    })
}

/// Machine-readable cover dump.
#[derive(Serialize)]
pub struct CoverDump<'a> {
    pub n: u32,
    pub k: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub words: &'a [CoverWord],
    pub disjoint: &'a DisjointSubsystem,
}

pub fn cover_to_json(cover: &DynamicCover, dis: &DisjointSubsystem) -> String {
    serde_json::to_string_pretty(&CoverDump {
        n: cover.n,
        k: cover.constants.k,
        big_k: cover.constants.big_k,
        q: cover.q_n,
        d: cover.d_n,
        words: &cover.words,
        disjoint: dis,
    })
    .expect("cover serialization")
}

/// Convenience pipeline: distortion report, cover and disjoint subsystem.
pub fn cover_pipeline(
    system: &System,
    n: u32,
    constants: &ContractionConstants,
    sampling: &Sampling,
) -> Result<(DistortionReport, DynamicCover, DisjointSubsystem)> {
    let report = crate::distortion::distortion_report(system, n, sampling)?;
    let cover = build_dynamic_cover(system, n, constants, &report)?;
    let dis = maximal_disjoint(system, &cover);
    Ok((report, cover, dis))
}

/// Cells of the attractor of the selected subsystem must sit inside the
/// slack-inflated attractor of the parent (Λ_n ⊆ Λ).
pub fn subsystem_attractor_contained(
    system: &System,
    cover: &DynamicCover,
    dis: &DisjointSubsystem,
    level: u32,
    tol: f64,
) -> Result<bool> {
    let sub = subsystem(system, cover, dis)?;
    let at_sub = crate::ifs::attractor(&sub, level, tol)?;
    let at_full = crate::ifs::attractor(system, level, tol)?;
    let slack = at_sub.hd_error + at_full.hd_error + at_full.grid.diag();
    let full_centers = at_full.grid.centers();
    Ok(at_sub.grid.centers().iter().all(|c| {
        full_centers
            .iter()
            .map(|d| c.dist(d))
            .fold(f64::INFINITY, f64::min)
            <= slack
    }))
}
