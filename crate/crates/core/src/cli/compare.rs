//! Numeric-versus-oracle comparison cases.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{AmbientDomain, MoebiusMap, RadialInterval, SubregionSpec};
use crate::moments::{gram, GramMatrix, MomentRequest};
use crate::oracles::{
    ball_bounds, dilation_spectrum, horostrip_endpoint, horostrip_interval, horostrip_numeric_sup, lune_norm,
    lune_sup, offcenter_disc_spectrum, slice_norm, OracleKind,
};
use crate::schatten::{iterated_kernel_integral, schatten_norm, trace_by_formula, trace_of_power, TraceOptions};
use crate::toeplitz::{eigensolve, isospectrality_check, moebius_image, SpectrumEstimate};

/// How `numeric` is held against `oracle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|numeric − oracle| ≤ tolerance`
    Absolute,
    /// `|numeric − oracle| ≤ tolerance · |oracle|`
    Relative,
    /// `numeric ≤ oracle + tolerance`
    AtMost,
    /// `numeric < oracle`
    Below,
    /// `numeric ≥ oracle − tolerance`
    AtLeast,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Absolute => "abs",
            Relation::Relative => "rel",
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
        }
    }

    fn holds(self, numeric: f64, oracle: f64, tolerance: f64) -> bool {
        match self {
            Relation::Absolute => (numeric - oracle).abs() <= tolerance,
            Relation::Relative => (numeric - oracle).abs() <= tolerance * oracle.abs(),
            Relation::AtMost => numeric <= oracle + tolerance,
            Relation::Below => numeric < oracle,
            Relation::AtLeast => numeric >= oracle - tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub case: &'static str,
    pub quantity: String,
    pub relation: Relation,
    pub numeric: f64,
    pub oracle: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Recorder {
    case: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn add(&mut self, quantity: impl Into<String>, relation: Relation, numeric: f64, oracle: f64, tolerance: f64) {
        self.checks.push(Check {
            case: self.case,
            quantity: quantity.into(),
            relation,
            numeric,
            oracle,
            tolerance,
            pass: relation.holds(numeric, oracle, tolerance),
        });
    }
}

type CaseFn = fn(&mut Recorder, &mut ChaCha8Rng) -> Result<()>;

/// Every case, in order.
const CASES: [(&str, CaseFn); 12] = [
    ("dilation", dilation),
    ("offcenter", offcenter),
    ("horostrip", horostrip),
    ("strip-containment", strip_containment),
    ("lune", lune),
    ("complement", complement),
    ("triangle-trace", triangle_trace),
    ("schatten", schatten),
    ("ball", ball),
    ("bidisc", bidisc),
    ("moebius", moebius),
    ("horodisc", horodisc),
];

pub fn case_names() -> Vec<&'static str> {
    CASES.iter().map(|c| c.0).collect()
}

/// Runs the named case (or all of them for `None`/`"all"`).
pub fn run(case: Option<&str>, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (name, f) in CASES {
        if case.is_some_and(|c| c != "all" && c != name) {
            continue;
        }
        let mut rec = Recorder {
            case: name,
            checks: Vec::new(),
        };
        f(&mut rec, &mut rng)?;
        out.extend(rec.checks);
    }
    Ok(out)
}

const DISC: AmbientDomain = AmbientDomain::UnitDisc;

fn gram_of(ambient: &AmbientDomain, region: &SubregionSpec, order: usize) -> Result<GramMatrix> {
    gram(&MomentRequest::new(ambient.clone(), region.clone(), order))
}

fn spectrum_of(region: &SubregionSpec, order: usize) -> Result<SpectrumEstimate> {
    eigensolve(&gram_of(&DISC, region, order)?)
}

fn max_entry_deviation(g: &GramMatrix, want: impl Fn(usize, usize) -> f64) -> f64 {
    let n = g.dim();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max((g.get(j, k) - want(j, k)).norm());
        }
    }
    worst
}

fn dilation(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let oracle = dilation_spectrum(1, 0.5)?;
    let g = gram_of(&DISC, &SubregionSpec::dilated(0.5), 16)?;
    let worst = max_entry_deviation(&g, |j, k| if j == k { oracle.eigenvalue(j).unwrap_or(0.0) } else { 0.0 });
    rec.add("max Gram entry error, rho=0.5, N=16", Relation::Absolute, worst, 0.0, 1e-13);
    Ok(())
}

fn offcenter(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let z0 = Complex64::new(0.3, 0.0);
    let oracle = offcenter_disc_spectrum(z0, 0.2)?;
    let s = spectrum_of(&SubregionSpec::disc(z0, 0.2), 80)?;
    for k in 0..5 {
        let tol = if k == 0 { 1e-6 } else { 1e-4 };
        let want = oracle.eigenvalue(k).unwrap_or(f64::NAN);
        rec.add(format!("lambda_{k}, N=80"), Relation::Relative, s.eigenvalues[k], want, tol);
    }
    Ok(())
}

fn horostrip(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 50 {
        let a: f64 = rng.gen_range(0.02..0.98);
        let b: f64 = rng.gen_range(0.02..0.98);
        let (rho1, rho2) = if a < b { (a, b) } else { (b, a) };
        if rho2 - rho1 < 1e-3 {
            continue;
        }
        let closed = horostrip_endpoint(rho1, rho2)?;
        let numeric = horostrip_numeric_sup(rho1, rho2)?.value;
        worst = worst.max((closed - numeric).abs());
        n += 1;
    }
    rec.add("max |closed form - golden section|, 50 pairs", Relation::Absolute, worst, 0.0, 1e-10);
    let hi = horostrip_endpoint(0.25, 0.5)?;
    rec.add("endpoint (1/4, 1/2)", Relation::Absolute, hi, 2.0 / (3.0 * 3f64.sqrt()), 1e-12);
    Ok(())
}

fn strip_containment(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let OracleKind::Interval { hi, .. } = horostrip_interval(0.25, 0.5)?.kind else {
        unreachable!("strip oracle is an interval")
    };
    let region = SubregionSpec::horocyclic_strip(0.0, 0.25, 0.5);
    let mut prev: Option<f64> = None;
    for n in [32, 64, 128] {
        let s = spectrum_of(&region, n)?;
        rec.add(format!("top eigenvalue, N={n}"), Relation::AtMost, s.top(), hi, 5e-3);
        rec.add(format!("bottom eigenvalue, N={n}"), Relation::AtLeast, s.bottom(), 0.0, s.tolerance());
        if let Some(p) = prev {
            rec.add(format!("top eigenvalue nondecreasing, N={n}"), Relation::AtLeast, s.top(), p, 0.0);
        }
        prev = Some(s.top());
    }
    Ok(())
}

fn lune(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let mut worst: f64 = 0.0;
    for &a in &grid {
        for &b in grid.iter().filter(|&&b| b > a) {
            worst = worst.max(lune_norm(a, b)?.bounds().1);
        }
    }
    rec.add("largest interior lune norm", Relation::Below, worst, 1.0 - 1e-6, 0.0);
    let mut weakest: f64 = 1.0;
    for &b in &grid {
        weakest = weakest.min(lune_sup(0.0, b)?.grid_value);
    }
    rec.add("smallest crescent grid supremum", Relation::AtLeast, weakest, 1.0, 1e-3);
    Ok(())
}

fn complement(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let regions = [
        ("dilated", SubregionSpec::dilated(0.5)),
        ("off-center disc", SubregionSpec::disc(Complex64::new(0.3, -0.2), 0.35)),
        ("horocyclic strip", SubregionSpec::horocyclic_strip(0.0, 0.25, 0.5)),
    ];
    for (label, u) in regions {
        let a = gram_of(&DISC, &u, 32)?;
        let b = gram_of(&DISC, &SubregionSpec::complement(u), 32)?;
        let mut worst: f64 = 0.0;
        for j in 0..32 {
            for k in 0..32 {
                let id = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((a.get(j, k) + b.get(j, k) - id).norm());
            }
        }
        rec.add(format!("max |G_U + G_complement - I|, {label}"), Relation::Absolute, worst, 0.0, 1e-10);
    }
    Ok(())
}

fn triangle_trace(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let t = trace_by_formula(&SubregionSpec::ideal_triangle(), &DISC, &TraceOptions::default())?;
    rec.add("trace of the ideal triangle", Relation::Relative, t.value, 0.25, 0.02);
    Ok(())
}

fn schatten(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let g = gram_of(&DISC, &SubregionSpec::dilated(0.5), 40)?;
    let s1 = schatten_norm(&g, 1.0)?;
    rec.add("S_1 norm, rho=0.5, N=40", Relation::Absolute, s1.value_matrix, 1.0 / 3.0, 1e-8 + s1.tail_bound);
    for p in [1u32, 2, 3] {
        let r = schatten_norm(&g, p as f64)?;
        let power = trace_of_power(&g, p).powf(1.0 / p as f64);
        rec.add(format!("eigenvalue vs matrix-power path, p={p}"), Relation::Absolute, r.value_matrix, power, 1e-10);
    }
    let h = gram_of(&DISC, &SubregionSpec::disc(Complex64::new(0.2, 0.1), 0.3), 30)?;
    let (integral, err) = iterated_kernel_integral(&h, 3)?;
    rec.add("integral of B3 vs tr G^2", Relation::Absolute, integral, trace_of_power(&h, 2), 1e-10 + err);
    Ok(())
}

fn ball(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let (lower, upper) = ball_bounds(2, 1.0, 0.5, 0.5)?.bounds();
    rec.add("lower bound (r/R)^n", Relation::Absolute, lower, 0.25, 0.0);
    rec.add("upper bound (delta/R)^((n-1)/2)", Relation::Absolute, upper, 0.5f64.sqrt(), 0.0);
    for n in [2usize, 3] {
        let g = gram_of(&AmbientDomain::ball(n), &SubregionSpec::dilated(0.5), 1)?;
        rec.add(
            format!("constant Rayleigh quotient, n={n}"),
            Relation::Absolute,
            g.get(0, 0).re,
            0.5f64.powi(2 * n as i32),
            0.0,
        );
    }
    for (n, r, delta) in [(2usize, 0.5, 0.5f64), (3, 0.3, 0.6), (4, 0.2, 0.9)] {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..200 {
            let z = Complex64::new(delta, 0.0)
                + Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
            worst = worst.max(slice_norm(n, r, delta, z)?);
        }
        let cap = delta.powf((n as f64 - 1.0) / 2.0);
        rec.add(format!("max slice norm, n={n}"), Relation::AtMost, worst, cap, 1e-12);
    }
    Ok(())
}

fn bidisc(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let (r1, r2) = (0.6f64, 0.4f64);
    let amb = AmbientDomain::polydisc(vec![1.0, 1.0]);
    let region = SubregionSpec::product(vec![RadialInterval::new(0.0, r1), RadialInterval::new(r2, 1.0)]);
    let g = gram_of(&amb, &region, 41)?;
    let sup = g.diagonal().into_iter().fold(0.0, f64::max);
    rec.add("sup of the product spectrum, |alpha| <= 40", Relation::Absolute, sup, r1 * r1, 1e-12);
    rec.add("restriction norm", Relation::Absolute, sup.sqrt(), r1, 1e-12);
    Ok(())
}

fn moebius(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let zero = Complex64::new(0.0, 0.0);
    let region = SubregionSpec::disc(zero, 0.3);
    let map = MoebiusMap::new(Complex64::new(0.4, 0.0), 0.0)?;
    let dev = isospectrality_check(&region, &map, 80)?;
    rec.add("top-3 eigenvalue deviation, N=80", Relation::AtMost, dev, 0.0, 1e-4);
    let oracle = offcenter_disc_spectrum(zero, 0.3)?.eigenvalue(0).unwrap_or(f64::NAN);
    let image = moebius_image(&region, &map)?;
    rec.add("top eigenvalue, disc", Relation::Relative, spectrum_of(&region, 80)?.top(), oracle, 1e-4);
    rec.add("top eigenvalue, image", Relation::Relative, spectrum_of(&image, 80)?.top(), oracle, 1e-4);
    Ok(())
}

fn horodisc(rec: &mut Recorder, _: &mut ChaCha8Rng) -> Result<()> {
    let region = SubregionSpec::horodisc(0.0, 0.5);
    let mut prev: Option<f64> = None;
    let mut last = None;
    for n in [32, 64, 128] {
        let s = spectrum_of(&region, n)?;
        if let Some(p) = prev {
            rec.add(format!("top eigenvalue nondecreasing, N={n}"), Relation::AtLeast, s.top(), p, 0.0);
        }
        prev = Some(s.top());
        last = Some(s);
    }
    let s = last.expect("three orders");
    let max = s.top();
    let mut bins = [0usize; 10];
    for &l in &s.eigenvalues {
        bins[((l / max) * 10.0).floor().clamp(0.0, 9.0) as usize] += 1;
    }
    let fewest = bins.iter().copied().min().unwrap_or(0);
    rec.add("fewest eigenvalues in a histogram bin, N=128", Relation::AtLeast, fewest as f64, 1.0, 0.0);
    Ok(())
}
