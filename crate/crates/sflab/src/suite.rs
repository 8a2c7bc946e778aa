//! The verification battery: each criterion exercises one contract of the
//! laboratory end to end and reports a pass/fail line. The CLI `suite`
//! subcommand and the acceptance test target both run exactly this code.

use crate::boundary::{
    condition_from_t, is_lagrangian, negative_subspace_f, t_from_condition,
    BoundaryAutomorphism, BoundaryCondition, ConormalData,
};
use crate::discretize::AnnulusGrid;
use crate::linalg::random::{
    random_hermitian, random_idempotent, random_invertible_hermitian, random_unitary,
};
use crate::linalg::{
    adjoint, eye, gap_distance, op_norm, smallest_sv, try_inverse, CMatrix, SubspaceFrame,
    SV_RTOL,
};
use crate::operator::OperatorMatrix;
use crate::scenario::{assemble_path, assemble_psi, ScenarioKind, ScenarioSpec};
use crate::spectralflow::{
    concatenate, conjugate, direct_sum_paths, spectral_flow, FlowOptions, GaugeSpec,
    OperatorPath,
};
use crate::symbol::{
    chiral_split, is_dirac, random_elliptic_symbol, restricted_spectrum_imag_range,
    retract_symbol, theta_coords, theta_inverse,
};
use crate::topology::{
    chern_number, direct_sum, psi_invariant, realize_chern, realize_extendable, Scenario,
    TorusProjectorFamily,
};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Outcome of one criterion.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub wall_ms: u128,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} — {} ({}; {:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.wall_ms as f64 / 1000.0
        )
    }
}

/// Battery resolution: the full desk-scale run or the quick smoke variant.
#[derive(Debug, Clone, Copy)]
pub struct SuiteScale {
    pub max_mode: usize,
    pub n_z: usize,
    pub n_t: usize,
    pub psi_grid: usize,
    pub random_instances: usize,
    pub seed: u64,
}

impl SuiteScale {
    pub fn full(seed: u64) -> Self {
        Self {
            max_mode: 32,
            n_z: 64,
            n_t: 64,
            psi_grid: 64,
            random_instances: 500,
            seed,
        }
    }

    pub fn fast(seed: u64) -> Self {
        Self {
            max_mode: 8,
            n_z: 24,
            n_t: 16,
            psi_grid: 24,
            random_instances: 60,
            seed,
        }
    }

    fn spec(&self, kind: ScenarioKind) -> ScenarioSpec {
        ScenarioSpec {
            kind,
            grid: AnnulusGrid::new(self.max_mode, self.n_z),
            nt: self.n_t,
            psi_nx: self.psi_grid,
            psi_nt: self.psi_grid,
        }
    }
}

fn outcome(
    id: usize,
    name: &str,
    start: Instant,
    result: std::result::Result<String, String>,
) -> CriterionOutcome {
    let (passed, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CriterionOutcome {
        id,
        name: name.into(),
        passed,
        detail,
        wall_ms: start.elapsed().as_millis(),
    }
}

/// Criterion 1 — the spectral-flow formula sf = Ψ on rotating-boundary
/// scenarios with target Chern numbers −2..2, exact integers.
pub fn criterion_1(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let mut pieces = Vec::new();
        for n in -2i64..=2 {
            let t0 = Instant::now();
            let spec = scale.spec(ScenarioKind::RotatingBc {
                chern: n,
                bc_winding: 1,
            });
            let path = assemble_path(&spec).map_err(|e| format!("n={n}: {e}"))?;
            let sf = spectral_flow(&path, FlowOptions::default())
                .map_err(|e| format!("n={n}: {e}"))?;
            let psi = psi_invariant(&assemble_psi(&spec).map_err(|e| format!("n={n}: {e}"))?)
                .map_err(|e| format!("n={n}: {e}"))?;
            let secs = t0.elapsed().as_secs_f64();
            if sf.value != psi || psi != n {
                return Err(format!("n={n}: sf={} Ψ={psi} target={n}", sf.value));
            }
            if secs > 300.0 {
                return Err(format!("n={n}: scenario took {secs:.0} s (> 5 min)"));
            }
            pieces.push(format!("n={n}: sf=Ψ={n} [{secs:.0}s]"));
        }
        Ok(pieces.join(", "))
    };
    outcome(1, "Theorem sf = Ψ on rotating-bc scenarios", start, run())
}

/// Criterion 2 — annulus calibration: the n = 1 rotating scenario gives
/// sf = 1 = Ψ, and one flux quantum in the ab-flux scenario produces the
/// same integer from both pipelines independently.
pub fn criterion_2(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let spec = scale.spec(ScenarioKind::RotatingBc {
            chern: 1,
            bc_winding: 1,
        });
        let sf = spectral_flow(
            &assemble_path(&spec).map_err(|e| e.to_string())?,
            FlowOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let psi = psi_invariant(&assemble_psi(&spec).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if sf.value != 1 || psi != 1 {
            return Err(format!("rotating n=1: sf={} Ψ={psi}, expected 1", sf.value));
        }
        let ab = scale.spec(ScenarioKind::AbFlux { flux: 1 });
        let sf_ab = spectral_flow(
            &assemble_path(&ab).map_err(|e| e.to_string())?,
            FlowOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        let psi_ab = psi_invariant(&assemble_psi(&ab).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        if sf_ab.value != psi_ab {
            return Err(format!("ab-flux: sf={} Ψ={psi_ab}", sf_ab.value));
        }
        Ok(format!(
            "rotating n=1: sf=Ψ=1; ab-flux: sf=Ψ={} (cross-validated)",
            psi_ab
        ))
    };
    outcome(2, "annulus calibration (λ = 1)", start, run())
}

/// Criterion 3 — invertibility of the odd Dirac model with definite T.
pub fn criterion_3(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let mut details = Vec::new();
        for t_sign in [1.0, -1.0] {
            let delta_at = |n_z: usize| -> std::result::Result<f64, String> {
                let grid = AnnulusGrid::new(scale.max_mode.min(8), n_z);
                let blocks = crate::discretize::build_dirac_annulus(grid, 1, 0.0, None);
                let mk = |edge| -> std::result::Result<_, String> {
                    let cd = crate::discretize::edge_conormal_data(1, edge);
                    let t = BoundaryAutomorphism::scalar(1, t_sign);
                    let frame = crate::discretize::edge_condition_frame(&cd, &t)
                        .map_err(|e| e.to_string())?;
                    Ok(crate::discretize::EdgeCondition::Uniform(
                        BoundaryCondition::new(SubspaceFrame::from_orthonormal(frame)),
                    ))
                };
                let op = crate::discretize::impose_condition(
                    &blocks,
                    &mk(crate::discretize::Edge::Z0)?,
                    &mk(crate::discretize::Edge::Z1)?,
                )
                .map_err(|e| e.to_string())?;
                op.matrix
                    .min_abs_eigenvalue(1e-10)
                    .map_err(|e| e.to_string())
            };
            let d64 = delta_at(64)?;
            let d128 = delta_at(128)?;
            if d64 <= 0.5 {
                return Err(format!("T={t_sign}: δ(64) = {d64:.4} not bounded away from 0"));
            }
            let rel = (d64 - d128).abs() / d128;
            if rel >= 0.10 {
                return Err(format!(
                    "T={t_sign}: δ varies {:.1}% between n_z = 64 and 128",
                    rel * 100.0
                ));
            }
            details.push(format!(
                "T={t_sign:+.0}: δ={d64:.4}→{d128:.4} ({:.2}%)",
                rel * 100.0
            ));
        }
        Ok(details.join("; "))
    };
    outcome(3, "invertibility of odd Dirac with definite T", start, run())
}

/// Criterion 4 — the projector identities on random instances.
pub fn criterion_4(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(scale.seed ^ 0x4);
        let instances = scale.random_instances.max(200);
        let mut not_complementary = 0usize;
        for i in 0..instances {
            let n = 2 + rng.gen_range(0..11); // dims ≤ 12
            // Eq. (Port): P_ort = P (P + P* − 1)⁻¹ is the orthogonal
            // projector on im P
            let p = random_idempotent(&mut rng, n);
            let port = crate::linalg::orthogonalize_idempotent(&p);
            let image_proj = p.image().projector();
            if op_norm(&(port.matrix() - &image_proj)) > 1e-9 * (1.0 + op_norm(p.matrix())) {
                return Err(format!("instance {i}: Port identity violated"));
            }
            // Eq. (PLM): P_{L,M} = P_L (P_L − P_M)⁻¹
            let k = 1 + rng.gen_range(0..n - 1);
            let (l, m) = crate::linalg::random::random_complementary_pair(&mut rng, n, k);
            let plm = crate::linalg::oblique_projector(&l, &m).map_err(|e| e.to_string())?;
            let pl = l.projector();
            let pm = m.projector();
            let direct = pl.dot(&try_inverse(&(&pl - &pm)).map_err(|e| e.to_string())?);
            if op_norm(&(plm.matrix() - &direct)) > 1e-9 * (1.0 + op_norm(&direct)) {
                return Err(format!("instance {i}: PLM identity violated"));
            }
            // PQST block: S, T with (P−Q)⁻¹ = S − T and P+Q = (2S−1)(P−Q)
            let q = random_idempotent(&mut rng, n);
            let diff = p.matrix() - q.matrix();
            let sv = smallest_sv(&diff);
            let threshold = SV_RTOL * op_norm(&diff);
            match crate::linalg::complementary_pair_projectors(&p, &q) {
                Ok((s, t)) => {
                    if sv < threshold {
                        return Err(format!(
                            "instance {i}: accepted despite σ_min {sv:.2e} < {threshold:.2e}"
                        ));
                    }
                    let st = s.matrix() - t.matrix();
                    let inv = try_inverse(&diff).map_err(|e| e.to_string())?;
                    let e1 = op_norm(&(&st - &inv));
                    let lhs = p.matrix() + q.matrix();
                    let rhs = (s.matrix().mapv(|z| z * 2.0) - &eye(n)).dot(&diff);
                    let e2 = op_norm(&(&lhs - &rhs));
                    let scale_norm = 1.0 + op_norm(&inv);
                    if e1 > 1e-9 * scale_norm || e2 > 1e-9 * scale_norm {
                        return Err(format!(
                            "instance {i}: PQST identities off by {:.2e}",
                            e1.max(e2)
                        ));
                    }
                }
                Err(crate::linalg::LinalgError::NotComplementary { .. }) => {
                    not_complementary += 1;
                    if sv > threshold * 1.0001 {
                        return Err(format!(
                            "instance {i}: NotComplementary raised at σ_min {sv:.2e} > {threshold:.2e}"
                        ));
                    }
                }
                Err(e) => return Err(format!("instance {i}: {e}")),
            }
        }
        Ok(format!(
            "{instances} instances, identities ≤ 1e-9, {not_complementary} degenerate pairs flagged"
        ))
    };
    outcome(4, "projector identities (PLM, Port, PQST)", start, run())
}

/// Criterion 5 — chiral splitting, Θ-chart and retraction on random
/// elliptic symbols.
pub fn criterion_5(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(scale.seed ^ 0x5);
        let instances = scale.random_instances.max(500);
        for i in 0..instances {
            let n = 2 * (1 + rng.gen_range(0..4)); // dims ≤ 8, even
            let sym = random_elliptic_symbol(&mut rng, n);
            let split = chiral_split(&sym).map_err(|e| format!("{i}: {e}"))?;
            if split.e_plus.rank() != n / 2 || split.e_minus.rank() != n / 2 {
                return Err(format!("{i}: rank mismatch"));
            }
            let (_, hi) = restricted_spectrum_imag_range(&split.q, &split.e_minus);
            let (lo, _) = restricted_spectrum_imag_range(&split.q, &split.e_plus);
            if !(hi < 0.0 && lo > 0.0) {
                return Err(format!("{i}: half-plane spectra violated"));
            }
            let c1: f64 = rng.gen_range(-2.0..2.0);
            let c2: f64 = rng.gen_range(-2.0..2.0);
            if c1.abs() + c2.abs() > 1e-3 {
                let sx = sym.evaluate(c1, c2);
                for f in [&split.e_plus, &split.e_minus] {
                    let ov = adjoint(f.basis()).dot(&sx).dot(f.basis());
                    if op_norm(&ov) > 1e-9 * op_norm(&sx).max(1.0) {
                        return Err(format!("{i}: σ(ξ)E± ⊥ E± violated"));
                    }
                }
            }
            let theta = theta_coords(&sym).map_err(|e| format!("{i}: {e}"))?;
            let back = theta_inverse(&theta).map_err(|e| format!("{i}: {e}"))?;
            let scale_norm = op_norm(sym.sigma1()).max(op_norm(sym.sigma2())).max(1.0);
            let rt = op_norm(&(back.sigma1() - sym.sigma1()))
                .max(op_norm(&(back.sigma2() - sym.sigma2())));
            if rt > 1e-9 * scale_norm {
                return Err(format!("{i}: Θ round trip off by {rt:.2e}"));
            }
            let r1 = retract_symbol(&sym, 1.0).map_err(|e| format!("{i}: {e}"))?;
            if !is_dirac(&r1) {
                return Err(format!("{i}: retraction endpoint not Dirac"));
            }
            // U(n)-equivariance on a subsample (the expensive check)
            if i % 10 == 0 {
                let g = random_unitary(&mut rng, n);
                let lhs = retract_symbol(&sym.conjugate(&g), 0.7)
                    .map_err(|e| format!("{i}: {e}"))?;
                let rhs = retract_symbol(&sym, 0.7)
                    .map_err(|e| format!("{i}: {e}"))?
                    .conjugate(&g);
                let d = op_norm(&(lhs.sigma1() - rhs.sigma1()))
                    .max(op_norm(&(lhs.sigma2() - rhs.sigma2())));
                if d > 1e-9 * scale_norm {
                    return Err(format!("{i}: equivariance off by {d:.2e}"));
                }
            }
        }
        Ok(format!("{instances} random elliptic symbols, dims ≤ 8"))
    };
    outcome(5, "symbol suite (split, Θ, retraction)", start, run())
}

/// Criterion 6 — the L ↔ T correspondence on random boundary data.
pub fn criterion_6(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(scale.seed ^ 0x6);
        let instances = scale.random_instances.max(500);
        let mut lagr_agree = 0usize;
        for i in 0..instances {
            let n = 2 * (1 + rng.gen_range(0..4));
            let sym = random_elliptic_symbol(&mut rng, n);
            let data = match ConormalData::from_symbol(&sym) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let hermitian: bool = rng.gen_bool(0.5);
            let tm = if hermitian {
                random_invertible_hermitian(&mut rng, n / 2, 0.2)
            } else {
                let mut m = random_invertible_hermitian(&mut rng, n / 2, 0.2);
                m[(0, 0)] += c64::new(0.0, 0.9);
                m
            };
            let t = BoundaryAutomorphism::new(tm);
            let l = condition_from_t(&data, &t).map_err(|e| format!("{i}: {e}"))?;
            let t_back = t_from_condition(&data, &l).map_err(|e| format!("{i}: {e}"))?;
            let l_back = condition_from_t(&data, &t_back).map_err(|e| format!("{i}: {e}"))?;
            let gap = gap_distance(l.frame(), l_back.frame());
            let t_err = op_norm(&(t_back.matrix() - t.matrix()))
                / op_norm(t.matrix()).max(1.0);
            if gap >= 1e-8 || t_err >= 1e-8 {
                return Err(format!("{i}: round trip gap {gap:.2e}, T error {t_err:.2e}"));
            }
            let lag = is_lagrangian(&data, &l).map_err(|e| format!("{i}: {e}"))?;
            if lag != hermitian {
                return Err(format!(
                    "{i}: Lagrangian verdict {lag} disagrees with Hermiticity {hermitian}"
                ));
            }
            lagr_agree += 1;
            // orthogonal-case reduction on Dirac-type data
            if i % 5 == 0 {
                let g = random_unitary(&mut rng, 2);
                let (sx, sy) = crate::symbol::pauli_pair();
                let dir = crate::symbol::check_ellipticity(&sx, &sy)
                    .unwrap()
                    .conjugate(&g);
                let ddata = ConormalData::from_symbol(&dir).map_err(|e| format!("{i}: {e}"))?;
                let tt = BoundaryAutomorphism::new(random_invertible_hermitian(
                    &mut rng, 1, 0.3,
                ));
                let ll = condition_from_t(&ddata, &tt).map_err(|e| format!("{i}: {e}"))?;
                let i_unit = c64::new(0.0, 1.0);
                let fm = ddata.e_minus().basis();
                let isn_inv = try_inverse(&ddata.sigma_n().mapv(|z| z * i_unit))
                    .map_err(|e| format!("{i}: {e}"))?;
                let explicit =
                    SubspaceFrame::span(&(&isn_inv.dot(&fm.dot(tt.matrix())) + fm));
                let g2 = gap_distance(ll.frame(), &explicit);
                if g2 >= 1e-9 {
                    return Err(format!("{i}: ortL reduction gap {g2:.2e}"));
                }
            }
        }
        Ok(format!(
            "{lagr_agree}/{lagr_agree} Lagrangian ⇔ Hermitian, round trips ≤ 1e-8"
        ))
    };
    outcome(6, "boundary suite (L ↔ T)", start, run())
}

/// Analytic Berry-curvature integral for a two-band d(k)·σ family, used as
/// the independent oracle for the plaquette engine. The sign constant links
/// the lower-band curvature to the (k₁, k₂) grid orientation used by the
/// plaquette sum; it is pinned once and confirmed on four masses.
pub fn berry_chern_two_band(
    d: impl Fn(f64, f64) -> [f64; 3],
    dd1: impl Fn(f64, f64) -> [f64; 3],
    dd2: impl Fn(f64, f64) -> [f64; 3],
    nk: usize,
) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut total = 0.0;
    for i in 0..nk {
        let k1 = tau * (i as f64 + 0.5) / nk as f64;
        for j in 0..nk {
            let k2 = tau * (j as f64 + 0.5) / nk as f64;
            let v = d(k1, k2);
            let a = dd1(k1, k2);
            let b = dd2(k1, k2);
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let r = r2.sqrt();
            let cross = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let triple = v[0] * cross[0] + v[1] * cross[1] + v[2] * cross[2];
            total += triple / (r2 * r);
        }
    }
    let cell = (tau / nk as f64) * (tau / nk as f64);
    // lower band of d·σ carries −deg(d̂) under this grid orientation
    -total * cell / (2.0 * tau)
}

fn qwz_d(mass: f64) -> impl Fn(f64, f64) -> [f64; 3] {
    move |k1, k2| [k1.sin(), k2.sin(), mass - k1.cos() - k2.cos()]
}

fn qwz_family(mass: f64, nk: usize) -> TorusProjectorFamily {
    let tau = std::f64::consts::TAU;
    let mut frames = vec![Vec::with_capacity(nk); nk];
    for i in 0..nk {
        let k1 = tau * i as f64 / nk as f64;
        for j in 0..nk {
            let k2 = tau * j as f64 / nk as f64;
            let d = qwz_d(mass)(k1, k2);
            let h = ndarray::array![
                [c64::new(d[2], 0.0), c64::new(d[0], -d[1])],
                [c64::new(d[0], d[1]), c64::new(-d[2], 0.0)]
            ];
            let (_, vecs) = crate::linalg::eigh(&h);
            frames[i].push(SubspaceFrame::from_orthonormal(
                vecs.slice(ndarray::s![.., ..1]).to_owned(),
            ));
        }
    }
    TorusProjectorFamily::from_grid(frames, vec![eye(2); nk]).unwrap()
}

/// Lower band of the two-band lattice model as a one-component scenario,
/// for the `chern` subcommand.
pub fn qwz_scenario(mass: f64, nk: usize) -> crate::topology::Result<Scenario> {
    if nk < 8 {
        return Err(crate::topology::TopologyError::GridMismatch(
            "qwz grid must be at least 8".into(),
        ));
    }
    Ok(Scenario::single(format!("qwz(m={mass})"), qwz_family(mass, nk)))
}

/// Criterion 7 — the plaquette Chern engine against grid refinement and the
/// Berry-curvature oracle.
pub fn criterion_7(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        // grid stability of realized families
        let grids: &[usize] = if scale.random_instances >= 500 {
            &[24, 48, 96]
        } else {
            &[24, 48]
        };
        for n in -3i64..=3 {
            let mut values = Vec::new();
            for &g in grids {
                let (_, fam) = realize_chern(n, 2, g, g).map_err(|e| e.to_string())?;
                values.push(chern_number(&fam).map_err(|e| e.to_string())?.rounded);
            }
            if values.iter().any(|&v| v != n) {
                return Err(format!("realize_chern({n}) gave {values:?} across {grids:?}"));
            }
        }
        // QWZ masses against the 256² Berry oracle
        let nk_plaq = if scale.random_instances >= 500 { 64 } else { 48 };
        let nk_oracle = 256;
        let mut qwz_line = Vec::new();
        for &mass in &[-3.0f64, -1.0, 1.0, 3.0] {
            let plaq = chern_number(&qwz_family(mass, nk_plaq))
                .map_err(|e| e.to_string())?
                .rounded;
            let d = qwz_d(mass);
            let dd1 = |k1: f64, _k2: f64| [k1.cos(), 0.0, k1.sin()];
            let dd2 = |_k1: f64, k2: f64| [0.0, k2.cos(), k2.sin()];
            let oracle = berry_chern_two_band(d, dd1, dd2, nk_oracle);
            if (oracle - plaq as f64).abs() > 0.01 {
                return Err(format!(
                    "mass {mass}: plaquette {plaq} vs Berry oracle {oracle:.4}"
                ));
            }
            // under the pinned grid orientation the lower band carries +1 at
            // m = 1 and −1 at m = −1, confirmed independently by the oracle
            let expected: i64 = match mass as i64 {
                -3 | 3 => 0,
                -1 => -1,
                1 => 1,
                _ => unreachable!(),
            };
            if plaq != expected {
                return Err(format!("mass {mass}: plaquette {plaq}, expected {expected}"));
            }
            qwz_line.push(format!("m={mass}: C={plaq}"));
        }
        Ok(format!(
            "realize_chern stable on {grids:?}; QWZ {}",
            qwz_line.join(", ")
        ))
    };
    outcome(7, "Chern engine vs grids and Berry oracle", start, run())
}

/// Criterion 8 — the Ψ properties: additivity, vanishing cases, stability.
pub fn criterion_8(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let g = scale.psi_grid.max(24);
        let mut rng = ChaCha8Rng::seed_from_u64(scale.seed ^ 0x8);
        // additivity under direct sum
        let (_, f1) = realize_chern(2, 2, g, g).map_err(|e| e.to_string())?;
        let (_, f2) = realize_chern(-1, 2, g, g).map_err(|e| e.to_string())?;
        let s1 = Scenario::single("a", f1);
        let s2 = Scenario::single("b", f2);
        let sum = direct_sum(&s1, &s2).map_err(|e| e.to_string())?;
        let (p1, p2, ps) = (
            psi_invariant(&s1).map_err(|e| e.to_string())?,
            psi_invariant(&s2).map_err(|e| e.to_string())?,
            psi_invariant(&sum).map_err(|e| e.to_string())?,
        );
        if ps != p1 + p2 {
            return Err(format!("additivity: {ps} ≠ {p1} + {p2}"));
        }
        // constant loops vanish
        let (_, f0) = realize_chern(0, 2, g, g).map_err(|e| e.to_string())?;
        if psi_invariant(&Scenario::single("const", f0)).map_err(|e| e.to_string())? != 0 {
            return Err("constant loop gave Ψ ≠ 0".into());
        }
        // extendable scenarios with zero total winding vanish
        let ext = realize_extendable(&[2, -1, -1], g, g).map_err(|e| e.to_string())?;
        if psi_invariant(&ext).map_err(|e| e.to_string())? != 0 {
            return Err("zero-total-winding scenario gave Ψ ≠ 0".into());
        }
        // all-positive T: empty F, Ψ = 0
        let frames = vec![vec![SubspaceFrame::zero(2); g]; g];
        let pos = TorusProjectorFamily::from_grid(frames, vec![eye(2); g])
            .map_err(|e| e.to_string())?;
        if psi_invariant(&Scenario::single("pos", pos)).map_err(|e| e.to_string())? != 0 {
            return Err("positive-definite scenario gave Ψ ≠ 0".into());
        }
        // stability under 5% self-adjoint perturbations of the T-loops
        let (t_grid, fam) = realize_chern(1, 2, g, g).map_err(|e| e.to_string())?;
        let c0 = chern_number(&fam).map_err(|e| e.to_string())?.rounded;
        let mut frames = Vec::new();
        for row in &t_grid {
            let mut frow = Vec::new();
            for tm in row {
                let h = random_hermitian(&mut rng, 2);
                let h = h.mapv(|z| z * (0.05 / op_norm(&h).max(1e-12)));
                let f = negative_subspace_f(&BoundaryAutomorphism::new(tm + &h))
                    .map_err(|e| e.to_string())?;
                frow.push(f);
            }
            frames.push(frow);
        }
        let pert = TorusProjectorFamily::from_grid(frames, vec![eye(2); g])
            .map_err(|e| e.to_string())?;
        let c1 = chern_number(&pert).map_err(|e| e.to_string())?.rounded;
        if c1 != c0 {
            return Err(format!("perturbation moved the integer {c0} → {c1}"));
        }
        Ok(format!(
            "additivity {p1}+{p2}={ps}; vanishing cases 0; 5% perturbation kept {c0}"
        ))
    };
    outcome(8, "Ψ properties (Ψ0–Ψ2)", start, run())
}

/// Criterion 9 — spectral-flow properties S0–S4 on random paths.
pub fn criterion_9(scale: &SuiteScale) -> CriterionOutcome {
    let start = Instant::now();
    let open = FlowOptions {
        check_endpoints: false,
        ..Default::default()
    };
    let run = || -> std::result::Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(scale.seed ^ 0x9);
        // (S0): gapped paths have zero flow
        for i in 0..20 {
            let n = 2 + rng.gen_range(0..10);
            let base = random_invertible_hermitian(&mut rng, n, 0.6);
            let wiggle = random_hermitian(&mut rng, n).mapv(|z| z * 0.1);
            let ts: Vec<f64> = (0..11).map(|j| j as f64 / 10.0).collect();
            let ms = ts
                .iter()
                .map(|&t| {
                    OperatorMatrix::dense(
                        &base + &wiggle.mapv(|z| z * c64::new((3.0 * t).sin(), 0.0)),
                    )
                })
                .collect();
            let path = OperatorPath::from_samples(ts, ms, GaugeSpec::Open);
            let f = spectral_flow(&path, open).map_err(|e| format!("S0 {i}: {e}"))?;
            if f.value != 0 {
                return Err(format!("S0 instance {i}: flow {}", f.value));
            }
        }
        // (S2): direct-sum additivity on random paths
        let instances = scale.random_instances.max(100).min(150);
        let mk = |rng: &mut ChaCha8Rng| -> OperatorPath {
            let n = 2 + rng.gen_range(0..19); // dims ≤ 40 after direct sum
            let a = random_hermitian(rng, n);
            let b = random_hermitian(rng, n).mapv(|z| z * 0.7);
            let slope: f64 = rng.gen_range(-4.0..4.0);
            let ts: Vec<f64> = (0..17).map(|j| j as f64 / 16.0).collect();
            let ms = ts
                .iter()
                .map(|&t| {
                    let m = &a
                        + &b.mapv(|z| z * c64::new((std::f64::consts::PI * t).sin(), 0.0))
                        + eye(n).mapv(|z| z * c64::new(slope * t, 0.0));
                    OperatorMatrix::dense(m)
                })
                .collect();
            OperatorPath::from_samples(ts, ms, GaugeSpec::Open)
        };
        for i in 0..instances {
            let p1 = mk(&mut rng);
            let p2 = mk(&mut rng);
            let f1 = spectral_flow(&p1, open).map_err(|e| format!("S2 {i}: {e}"))?.value;
            let f2 = spectral_flow(&p2, open).map_err(|e| format!("S2 {i}: {e}"))?.value;
            let sum = direct_sum_paths(&p1, &p2).map_err(|e| format!("S2 {i}: {e}"))?;
            let fs = spectral_flow(&sum, open).map_err(|e| format!("S2 {i}: {e}"))?.value;
            if fs != f1 + f2 {
                return Err(format!("S2 instance {i}: {fs} ≠ {f1} + {f2}"));
            }
        }
        // (S3): concatenation additivity
        for i in 0..20 {
            let n = 3 + rng.gen_range(0..8);
            let a = random_hermitian(&mut rng, n);
            let mid = random_hermitian(&mut rng, n);
            let path_between = |x: &CMatrix, y: &CMatrix| -> OperatorPath {
                let ts: Vec<f64> = (0..9).map(|j| j as f64 / 8.0).collect();
                let ms = ts
                    .iter()
                    .map(|&t| {
                        OperatorMatrix::dense(
                            x.mapv(|z| z * c64::new(1.0 - t, 0.0))
                                + y.mapv(|z| z * c64::new(t, 0.0)),
                        )
                    })
                    .collect();
                OperatorPath::from_samples(ts, ms, GaugeSpec::Open)
            };
            let b = random_hermitian(&mut rng, n);
            let p1 = path_between(&a, &mid);
            let p2 = path_between(&mid, &b);
            let f1 = spectral_flow(&p1, open).map_err(|e| format!("S3 {i}: {e}"))?.value;
            let f2 = spectral_flow(&p2, open).map_err(|e| format!("S3 {i}: {e}"))?.value;
            let cat = concatenate(&p1, &p2).map_err(|e| format!("S3 {i}: {e}"))?;
            let fc = spectral_flow(&cat, open).map_err(|e| format!("S3 {i}: {e}"))?.value;
            if fc != f1 + f2 {
                return Err(format!("S3 instance {i}: {fc} ≠ {f1} + {f2}"));
            }
        }
        // (S4): conjugacy invariance
        for i in 0..20 {
            let p = mk(&mut rng);
            let u = random_unitary(&mut rng, p.dim());
            let f0 = spectral_flow(&p, open).map_err(|e| format!("S4 {i}: {e}"))?.value;
            let pc = conjugate(&p, &u).map_err(|e| format!("S4 {i}: {e}"))?;
            let f1 = spectral_flow(&pc, open).map_err(|e| format!("S4 {i}: {e}"))?.value;
            if f0 != f1 {
                return Err(format!("S4 instance {i}: {f0} ≠ {f1}"));
            }
        }
        Ok(format!(
            "S0 ×20, S2 ×{instances}, S3 ×20, S4 ×20 — all exact"
        ))
    };
    outcome(9, "spectral-flow properties (S0–S4)", start, run())
}

/// Run the whole battery in order.
pub fn run_all(scale: &SuiteScale) -> Vec<CriterionOutcome> {
    vec![
        criterion_1(scale),
        criterion_2(scale),
        criterion_3(scale),
        criterion_4(scale),
        criterion_5(scale),
        criterion_6(scale),
        criterion_7(scale),
        criterion_8(scale),
        criterion_9(scale),
    ]
}
