//! Verification harness: seeded parameter sampling, batch identity checks,
//! specialization coherence, internal consistency sweeps and limit studies.
//!
//! Every identity draws from its own ChaCha8 stream (`seed`, stream = the
//! identity's position in [`CaseId::all`]), so adding or removing
//! identities from a run does not perturb the draws of the others.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{cx, distance_to_integer_range, pochhammer_ipd, sigma_coeffs, Cx, IpdSpec};
use crate::charpoly::{
    ckr_forms, ipd_exclusion_distance, lemma_limit_study, r_at, r_poly_alt, r_poly_sum, rhat_at,
    rhat_poly, LemmaParams, LimitStudy,
};
use crate::error::{Error, Result};
use crate::hyp::set_term_cap;
use crate::poly::roots;
use crate::summation::{beta_cross_check, karlsson_general, UnitCase, UnitId};
use crate::transforms::{IdentityCase, IdentityId, Params, Residual};

/// Resampling budget per draw before the draw is skipped.
pub const MAX_RESAMPLES: usize = 100;

/// Cancellation ratio above which a case is flagged.
pub const CANCELLATION_FLAG: f64 = 1e8;

/// Any checkable identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseId {
    Finite(IdentityId),
    Unit(UnitId),
}

impl CaseId {
    pub fn all() -> Vec<CaseId> {
        IdentityId::ALL
            .iter()
            .map(|&i| CaseId::Finite(i))
            .chain(UnitId::ALL.iter().map(|&u| CaseId::Unit(u)))
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Finite(i) => i.as_str(),
            CaseId::Unit(u) => u.as_str(),
        }
    }

    fn stream(self) -> u64 {
        CaseId::all().iter().position(|&c| c == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityId::from_str(s)
            .map(CaseId::Finite)
            .or_else(|_| UnitId::from_str(s).map(CaseId::Unit))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub draws: usize,
    pub r_max: usize,
    pub m_total_max: usize,
    pub x_box: f64,
    pub guard_band: f64,
    pub rel_tol: f64,
    pub term_cap: usize,
    pub identities: Vec<CaseId>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            draws: 50,
            r_max: 3,
            m_total_max: 5,
            x_box: 0.45,
            guard_band: 0.05,
            rel_tol: 1e-6,
            term_cap: 1_000_000,
            identities: CaseId::all(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::InvalidSpec(format!("config: bad value {v:?} for {key}")))
}

impl RunConfig {
    /// Parses a flat `key = value` file (`#` starts a comment). Unknown
    /// keys are rejected; `identities` is a comma list or `all`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidSpec(format!("config line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse_value(key, value)?,
            "draws" => self.draws = parse_value(key, value)?,
            "r_max" => self.r_max = parse_value(key, value)?,
            "m_total_max" => self.m_total_max = parse_value(key, value)?,
            "x_box" => self.x_box = parse_value(key, value)?,
            "guard_band" => self.guard_band = parse_value(key, value)?,
            "rel_tol" => self.rel_tol = parse_value(key, value)?,
            "term_cap" => self.term_cap = parse_value(key, value)?,
            "identities" => self.identities = parse_identities(value)?,
            _ => return Err(Error::InvalidSpec(format!("config: unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `HYPID_TERM_CAP` if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var("HYPID_TERM_CAP") {
            self.term_cap = parse_value("HYPID_TERM_CAP", v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(format!("config: {msg}")));
        if self.draws < 1 {
            return bad("draws must be at least 1");
        }
        if !(self.x_box > 0.0 && self.x_box < 0.5) {
            return bad("x_box must lie in (0, 0.5)");
        }
        if !(self.guard_band > 0.0) {
            return bad("guard_band must be positive");
        }
        if self.r_max < 1 || self.m_total_max < self.r_max.min(1) || self.m_total_max < 1 {
            return bad("r_max and m_total_max must be at least 1");
        }
        if self.m_total_max > 6 {
            return bad("m_total_max above 6 is not supported");
        }
        if !(self.rel_tol > 0.0) {
            return bad("rel_tol must be positive");
        }
        if self.term_cap < 1 {
            return bad("term_cap must be at least 1");
        }
        if self.identities.is_empty() {
            return bad("no identities selected");
        }
        Ok(())
    }
}

pub fn parse_identities(value: &str) -> Result<Vec<CaseId>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(CaseId::all());
    }
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(CaseId::from_str)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the identity are violated; not a numerical failure.
    ConstraintViolation,
    /// Guard band could not be satisfied within the resampling budget.
    Skipped,
}

/// A concrete instance of either kind of identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyCase {
    Finite(IdentityCase),
    Unit(UnitCase),
}

impl AnyCase {
    pub fn id(&self) -> CaseId {
        match self {
            AnyCase::Finite(c) => CaseId::Finite(c.id),
            AnyCase::Unit(c) => CaseId::Unit(c.id),
        }
    }

    pub fn tol(&self) -> f64 {
        match self {
            AnyCase::Finite(c) => c.tol,
            AnyCase::Unit(c) => c.tol,
        }
    }

    pub fn guard_distance(&self) -> Result<f64> {
        match self {
            AnyCase::Finite(c) => c.guard_distance(),
            AnyCase::Unit(c) => c.guard_distance(),
        }
    }

    pub fn evaluate(&self) -> Result<Residual> {
        match self {
            AnyCase::Finite(c) => c.evaluate(),
            AnyCase::Unit(c) => c.evaluate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub identity_id: CaseId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<AnyCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Cx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
    pub terms_used: usize,
    pub status: Status,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub pass: usize,
    pub fail: usize,
    pub constraint_violations: usize,
    pub skipped: usize,
    pub max_rel_err: f64,
    pub median_rel_err: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<CaseRecord>,
    pub summary: Summary,
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

impl Report {
    pub fn from_records(records: Vec<CaseRecord>) -> Self {
        let errs: Vec<f64> = records.iter().filter_map(|r| r.rel_err).collect();
        let count_of = |s: Status| records.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            count: records.len(),
            pass: count_of(Status::Pass),
            fail: count_of(Status::Fail),
            constraint_violations: count_of(Status::ConstraintViolation),
            skipped: count_of(Status::Skipped),
            max_rel_err: errs.iter().copied().fold(0.0, f64::max),
            median_rel_err: median(&errs),
        };
        Report { records, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    /// Records filtered to one identity, with a fresh summary.
    pub fn for_identity(&self, id: CaseId) -> Report {
        Report::from_records(
            self.records
                .iter()
                .filter(|r| r.identity_id == id)
                .cloned()
                .collect(),
        )
    }

    /// One JSON object per record followed by `{"summary": ...}`.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        let summary = serde_json::json!({ "summary": self.summary });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

/// Evaluates one case into a record.
pub fn run_case(index: usize, case: &AnyCase) -> CaseRecord {
    let id = case.id();
    let mut rec = CaseRecord {
        index,
        identity_id: id,
        case: Some(case.clone()),
        lhs: None,
        rhs: None,
        rel_err: None,
        terms_used: 0,
        status: Status::Fail,
        flags: vec![],
    };
    match case.guard_distance() {
        Ok(d) if d <= crate::arith::INTEGER_SNAP => {
            rec.status = Status::ConstraintViolation;
            rec.flags.push("constraint_violation".into());
            return rec;
        }
        Err(Error::ConstraintViolation(msg)) => {
            rec.status = Status::ConstraintViolation;
            rec.flags.push(format!("constraint_violation: {msg}"));
            return rec;
        }
        Err(e) => {
            rec.flags.push(format!("error: {e}"));
            return rec;
        }
        Ok(_) => {}
    }
    match case.evaluate() {
        Ok(res) => fill_record(&mut rec, &res, case.tol()),
        Err(Error::ConstraintViolation(msg)) => {
            rec.status = Status::ConstraintViolation;
            rec.flags.push(format!("constraint_violation: {msg}"));
        }
        Err(e) => rec.flags.push(format!("error: {e}")),
    }
    rec
}

fn fill_record(rec: &mut CaseRecord, res: &Residual, tol: f64) {
    rec.lhs = Some(res.lhs);
    rec.rhs = Some(res.rhs);
    rec.rel_err = Some(res.rel_err);
    rec.terms_used = res.lhs_report.terms_used + res.rhs_report.terms_used;
    if !res.converged() {
        rec.flags.push("not_converged".into());
    }
    if res.cancellation() > CANCELLATION_FLAG {
        rec.flags.push("cancellation".into());
    }
    if !res.rel_err.is_finite() {
        rec.flags.push("non_finite".into());
    }
    rec.status = if res.rel_err <= tol && res.converged() {
        Status::Pass
    } else {
        Status::Fail
    };
}

/// Uniform parameter sampling within the configured boxes.
pub struct Sampler {
    rng: ChaCha8Rng,
    r_max: usize,
    m_total_max: usize,
    x_box: f64,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64, cfg: &RunConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler {
            rng,
            r_max: cfg.r_max,
            m_total_max: cfg.m_total_max,
            x_box: cfg.x_box,
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn cuniform(&mut self, lo: f64, hi: f64) -> Cx {
        cx(self.uniform(lo, hi))
    }

    pub fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.gen_range(lo..=hi_inclusive)
    }

    /// Complex argument uniform in the disk of radius `x_box`.
    pub fn x(&mut self) -> Cx {
        let rad = self.x_box * self.rng.gen::<f64>().sqrt();
        let th = self.uniform(0.0, std::f64::consts::TAU);
        Cx::from_polar(rad, th)
    }

    /// Random `(f, m)` with `m_total >= min_m`; `f_j` uniform in `[0.3, 3]`.
    pub fn spec(&mut self, min_m: usize) -> IpdSpec {
        let m_hi = self.m_total_max.max(min_m);
        let r = self.int(1, self.r_max.min(m_hi));
        let m_total = self.int(min_m.max(r), m_hi);
        let mut m = vec![1usize; r];
        for _ in r..m_total {
            let j = self.int(0, r - 1);
            m[j] += 1;
        }
        let f = (0..r).map(|_| self.cuniform(0.3, 3.0)).collect();
        IpdSpec::new(f, m).expect("sampled spec is valid")
    }

    fn fixed_spec(&mut self, m: &[usize]) -> IpdSpec {
        let f = m.iter().map(|_| self.cuniform(0.3, 3.0)).collect();
        IpdSpec::new(f, m.to_vec()).expect("sampled spec is valid")
    }

    pub fn a(&mut self) -> Cx {
        self.cuniform(-1.5, 1.5)
    }

    pub fn b(&mut self) -> Cx {
        self.cuniform(0.1, 2.0)
    }

    /// One candidate for a finite-argument identity.
    pub fn finite_case(&mut self, id: IdentityId, tol: f64) -> Result<IdentityCase> {
        use IdentityId::*;
        let spec = match id {
            IntroA | IntroB | LimitM1 => self.fixed_spec(&[1]),
            Cor5a | Cor5b | Cor6 => self.spec(2),
            _ => self.spec(1),
        };
        let m = spec.m_total();
        let mut params = Params {
            b: self.b(),
            ..Params::default()
        };
        if !id.is_confluent() {
            params.a = Some(self.a());
        }
        match id {
            Mp1 | Mp2 | Mp3 => params.c = Some(self.cuniform(0.5, 6.0)),
            Thm1 | Thm2 | Thm3 => params.q = Some(self.int(0, m - 1)),
            LimitM1 => {
                params.c = Some(self.cuniform(0.5, 4.0));
                params.d = Some(self.cuniform(0.5, 3.0));
            }
            _ => {}
        }
        let x = self.x();
        IdentityCase::new(id, params, spec, x, tol)
    }

    /// One candidate for a unit-argument identity.
    pub fn unit_case(&mut self, id: UnitId, tol: f64) -> Result<UnitCase> {
        let mut params = Params {
            b: self.b(),
            ..Params::default()
        };
        let mut r_int = None;
        let spec = match id {
            UnitId::RedLemma | UnitId::Ex2 => self.fixed_spec(&[1]),
            UnitId::Ex3Sum => self.fixed_spec(&[2]),
            UnitId::Ex4 => self.fixed_spec(&[1, 1, 2]),
            _ => self.spec(1),
        };
        let m = spec.m_total();
        let b = params.b;
        match id {
            UnitId::Thm4 => {
                let q = self.int(0, m - 1);
                params.q = Some(q);
                params.a = Some(cx(-(q as f64) - 0.4 - self.uniform(0.0, 1.6)));
            }
            UnitId::Thm5 | UnitId::Cor7a => {
                if id == UnitId::Thm5 {
                    params.q = Some(self.int(0, m - 1));
                }
                params.n = Some(self.int(1, 8));
                params.d = Some(self.cuniform(0.1, 2.5));
                params.e = Some(self.cuniform(0.5, 4.0));
            }
            UnitId::Thm6 | UnitId::Cor7b => {
                let q = if id == UnitId::Thm6 {
                    self.int(0, m - 1)
                } else {
                    0
                };
                if id == UnitId::Thm6 {
                    params.q = Some(q);
                }
                params.a = Some(self.a());
                let d = self.cuniform(0.1, 1.5);
                params.d = Some(d);
                params.e = Some(b + d + cx(q as f64 + 0.4 + self.uniform(0.0, 2.0)));
            }
            UnitId::RedLemma => {
                let r = self.int(1, 3);
                r_int = Some(r);
                let a = self.a();
                params.a = Some(a);
                params.e = Some(a + b + cx(1.4 - r as f64 + self.uniform(0.0, 2.0)));
            }
            UnitId::Ex2 | UnitId::Ex3Sum => {
                params.a = Some(self.a());
                let hi = if id == UnitId::Ex2 { 3 } else { 2 };
                let pick = self.int(0, hi);
                if pick == 0 {
                    let d = self.cuniform(0.1, 1.5);
                    params.d = Some(d);
                    params.e = Some(b + d + cx(0.4 + self.uniform(0.0, 2.0)));
                } else {
                    r_int = Some(pick);
                    params.d = Some(self.cuniform(0.05, pick as f64 - 0.4));
                }
            }
            UnitId::Ex4 => {
                params.a = Some(self.a());
                let d = self.cuniform(0.1, 1.5);
                params.d = Some(d);
                params.e = Some(b + d + cx(2.4 + self.uniform(0.0, 2.0)));
            }
        }
        UnitCase::new(id, params, r_int, spec, tol)
    }

    pub fn case(&mut self, id: CaseId, tol: f64) -> Result<AnyCase> {
        Ok(match id {
            CaseId::Finite(i) => AnyCase::Finite(self.finite_case(i, tol)?),
            CaseId::Unit(u) => AnyCase::Unit(self.unit_case(u, tol)?),
        })
    }
}

fn install_term_cap(cfg: &RunConfig) {
    set_term_cap(cfg.term_cap);
}

/// Draws `cfg.draws` admissible cases per identity and checks each.
pub fn run_check(cfg: &RunConfig) -> Report {
    install_term_cap(cfg);
    let mut records = Vec::new();
    for &id in &cfg.identities {
        let mut sampler = Sampler::new(cfg.seed, id.stream(), cfg);
        for _ in 0..cfg.draws {
            let index = records.len();
            records.push(draw_and_check(&mut sampler, id, cfg, index));
        }
    }
    Report::from_records(records)
}

fn draw_and_check(sampler: &mut Sampler, id: CaseId, cfg: &RunConfig, index: usize) -> CaseRecord {
    for _ in 0..MAX_RESAMPLES {
        let case = match sampler.case(id, cfg.rel_tol) {
            Ok(c) => c,
            Err(_) => continue,
        };
        match case.guard_distance() {
            Ok(d) if d >= cfg.guard_band => {}
            _ => continue,
        }
        let res = match case.evaluate() {
            Ok(res) => res,
            Err(Error::ConstraintViolation(_)) => continue,
            Err(e) => {
                let mut rec = run_case(index, &case);
                if rec.flags.is_empty() {
                    rec.flags.push(format!("error: {e}"));
                }
                return rec;
            }
        };
        if res.root_pole_distance < cfg.guard_band {
            continue;
        }
        let mut rec = CaseRecord {
            index,
            identity_id: id,
            case: Some(case),
            lhs: None,
            rhs: None,
            rel_err: None,
            terms_used: 0,
            status: Status::Fail,
            flags: vec![],
        };
        fill_record(&mut rec, &res, cfg.rel_tol);
        return rec;
    }
    CaseRecord {
        index,
        identity_id: id,
        case: None,
        lhs: None,
        rhs: None,
        rel_err: None,
        terms_used: 0,
        status: Status::Skipped,
        flags: vec!["guard_exhausted".into()],
    }
}

/// A theorem and the corollary it specializes to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecializationPair {
    pub theorem: IdentityId,
    pub corollary: IdentityId,
}

pub const SPECIALIZATIONS: &[SpecializationPair] = {
    use IdentityId::*;
    const fn p(theorem: IdentityId, corollary: IdentityId) -> SpecializationPair {
        SpecializationPair { theorem, corollary }
    }
    &[
        p(Thm1, Cor1a),
        p(Thm2, Cor1b),
        p(Thm3, Cor2),
        p(Thm3, Cor2Alt),
        p(Thm1, Cor3a),
        p(Thm2, Cor3b),
        p(Thm3, Cor4),
        p(Thm1, Cor5a),
        p(Thm2, Cor5b),
        p(Thm3, Cor6),
    ]
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub draw: usize,
    pub pair: SpecializationPair,
    pub q: usize,
    pub rhs_theorem: Cx,
    pub rhs_corollary: Cx,
    /// `|rhs_theorem - rhs_corollary| / max(|rhs_theorem|, 1)`.
    pub diff: f64,
}

/// Shared draws on which every theorem/corollary pair is evaluated.
pub fn coherence_suite(cfg: &RunConfig, draws: usize) -> Result<Vec<CoherenceRow>> {
    install_term_cap(cfg);
    let mut sampler = Sampler::new(cfg.seed, 1000, cfg);
    let mut rows = Vec::new();
    let mut draw = 0;
    let mut attempts = 0;
    while draw < draws {
        attempts += 1;
        if attempts > draws * MAX_RESAMPLES {
            return Err(Error::InvalidSpec(
                "coherence: guard band could not be met".into(),
            ));
        }
        let spec = sampler.spec(2);
        let (a, b, x) = (sampler.a(), sampler.b(), sampler.x());
        let mut batch = Vec::new();
        let mut ok = true;
        for &pair in SPECIALIZATIONS {
            let cor = match make_pair_case(pair.corollary, a, b, &spec, x, None) {
                Some(c) => c,
                None => {
                    ok = false;
                    break;
                }
            };
            let q = cor.q()?;
            let thm = match make_pair_case(pair.theorem, a, b, &spec, x, Some(q)) {
                Some(c) => c,
                None => {
                    ok = false;
                    break;
                }
            };
            let (rt, rc) = match (thm.evaluate(), cor.evaluate()) {
                (Ok(rt), Ok(rc)) => (rt, rc),
                _ => {
                    ok = false;
                    break;
                }
            };
            if rt.root_pole_distance.min(rc.root_pole_distance) < cfg.guard_band {
                ok = false;
                break;
            }
            let diff = (rt.rhs - rc.rhs).norm() / rt.rhs.norm().max(1.0);
            batch.push(CoherenceRow {
                draw,
                pair,
                q,
                rhs_theorem: rt.rhs,
                rhs_corollary: rc.rhs,
                diff,
            });
        }
        if ok {
            rows.extend(batch);
            draw += 1;
        }
    }
    Ok(rows)
}

fn make_pair_case(
    id: IdentityId,
    a: Cx,
    b: Cx,
    spec: &IpdSpec,
    x: Cx,
    q: Option<usize>,
) -> Option<IdentityCase> {
    let params = Params {
        a: if id.is_confluent() { None } else { Some(a) },
        b,
        q,
        ..Params::default()
    };
    let case = IdentityCase::new(id, params, spec.clone(), x, 1e-10).ok()?;
    (case.guard_distance().ok()? >= 0.05).then_some(case)
}

/// Worst discrepancies between independently computed forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub specs: usize,
    pub ckr_forms: f64,
    pub r_forms: f64,
    pub r_at: f64,
    pub rhat_at: f64,
    pub sigma_round_trip: f64,
    pub errors: Vec<String>,
}

fn rel(x: Cx, y: Cx, scale: f64) -> f64 {
    (x - y).norm() / scale.max(x.norm()).max(y.norm()).max(f64::MIN_POSITIVE)
}

/// Fuzzes the dual-form quantities over random specs with `r <= 3`,
/// `m_total <= 6`.
pub fn consistency_suite(seed: u64, specs: usize) -> ConsistencyReport {
    let cfg = RunConfig {
        m_total_max: 6,
        ..RunConfig::default()
    };
    let mut s = Sampler::new(seed, 2000, &cfg);
    let mut rep = ConsistencyReport {
        specs,
        ..ConsistencyReport::default()
    };
    for _ in 0..specs {
        let spec = s.spec(1);
        let m = spec.m_total();
        let (a, b) = (s.a(), s.b());
        for k in 0..=m {
            match ckr_forms(k, &spec) {
                Ok((st, se, mag)) => rep.ckr_forms = rep.ckr_forms.max(rel(st, se, mag)),
                Err(e) => rep.errors.push(format!("ckr: {e}")),
            }
        }
        for q in 0..m {
            let main = match r_poly_sum(b, &spec, q) {
                Ok(p) => p,
                Err(e) => {
                    rep.errors.push(format!("r_poly: {e}"));
                    continue;
                }
            };
            let alt = r_poly_alt(b, &spec, q);
            let scale = main.scale.max(alt.scale);
            let n = main.coeffs.len().max(alt.coeffs.len());
            for i in 0..n {
                let x = main.coeffs.get(i).copied().unwrap_or_default();
                let y = alt.coeffs.get(i).copied().unwrap_or_default();
                rep.r_forms = rep.r_forms.max(rel(x, y, scale));
            }
            let t = cx(-(q as f64) - 1.0);
            match r_at(b, &spec, q) {
                Ok(v) => rep.r_at = rep.r_at.max(rel(v, main.eval(t), main.scale)),
                Err(e) => rep.errors.push(format!("r_at: {e}")),
            }
            if distance_to_integer_range(a - b, q as i64 + 1 - m as i64, q as i64) > 0.05 {
                match (rhat_poly(a, b, &spec, q), rhat_at(a, b, &spec, q)) {
                    (Ok(p), Ok(v)) => rep.rhat_at = rep.rhat_at.max(rel(v, p.eval(t), p.scale)),
                    (Err(e), _) | (_, Err(e)) => rep.errors.push(format!("rhat: {e}")),
                }
            }
        }
        let sigma = sigma_coeffs(&spec);
        for _ in 0..20 {
            let x = Cx::new(s.uniform(-3.0, 3.0), s.uniform(-3.0, 3.0));
            let horner = sigma.iter().rev().fold(cx(0.0), |acc, &c| acc * x + c);
            let direct = pochhammer_ipd(&spec, x);
            let size = sigma
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * x.norm() + c.norm());
            rep.sigma_round_trip = rep.sigma_round_trip.max(rel(horner, direct, size));
        }
    }
    rep
}

/// One terminating transformation re-derived through the beta integral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaCase {
    pub n: usize,
    pub b: Cx,
    pub d: f64,
    pub e: f64,
    pub spec: IpdSpec,
    pub q: usize,
    pub outcome: std::result::Result<Residual, String>,
}

/// Random terminating cases with real `0 < d < e` and `n > q`, each
/// checked by Gauss–Jacobi quadrature of the degenerate Euler–Pfaff
/// identity.
pub fn beta_suite(cfg: &RunConfig, cases: usize) -> Vec<BetaCase> {
    let mut s = Sampler::new(cfg.seed, 4000, cfg);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cases && attempts < cases * MAX_RESAMPLES {
        attempts += 1;
        let spec = s.spec(1);
        let m = spec.m_total();
        let q = s.int(0, m - 1);
        let n = s.int(q + 1, q + 6);
        let b = s.b();
        let d = s.uniform(0.3, 2.5);
        let e = d + s.uniform(0.3, 3.0);
        let params = Params {
            b,
            d: Some(cx(d)),
            e: Some(cx(e)),
            q: Some(q),
            n: Some(n),
            ..Params::default()
        };
        let admissible = UnitCase::new(UnitId::Thm5, params, None, spec.clone(), cfg.rel_tol)
            .and_then(|c| c.guard_distance())
            .map(|g| g >= cfg.guard_band)
            .unwrap_or(false);
        if !admissible {
            continue;
        }
        let outcome = beta_cross_check(n, b, d, e, &spec, q).map_err(|e| e.to_string());
        out.push(BetaCase {
            n,
            b,
            d,
            e,
            spec,
            q,
            outcome,
        });
    }
    out
}

/// A generalized Karlsson sum whose reduced polynomial vanishes
/// identically, so the sum itself must be zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingCase {
    pub a: Cx,
    pub b: Cx,
    pub spec: IpdSpec,
    pub q: usize,
    pub outcome: std::result::Result<Residual, String>,
}

/// Five constructed cases with `m - q - m_j <= 0` and
/// `f_j - b ∈ {m - q - m_j, ..., 0}`.
pub fn vanishing_suite() -> Vec<VanishingCase> {
    let c = Cx::new;
    let cases: [(Cx, Cx, Vec<Cx>, Vec<usize>, usize); 5] = [
        (cx(-1.6), cx(0.7), vec![cx(0.7)], vec![2], 1),
        (c(-1.7, 0.3), cx(1.8), vec![cx(0.8)], vec![2], 1),
        (cx(-2.5), cx(0.6), vec![cx(0.6), cx(1.9)], vec![2, 1], 2),
        (c(-2.6, 0.2), cx(1.5), vec![cx(1.4), cx(0.5)], vec![1, 3], 2),
        (cx(-2.45), c(2.3, 0.1), vec![c(0.3, 0.1)], vec![3], 2),
    ];
    cases
        .into_iter()
        .map(|(a, b, f, m, q)| {
            let spec = IpdSpec::new(f, m).expect("valid spec");
            let outcome = karlsson_general(a, b, &spec, q).map_err(|e| e.to_string());
            VanishingCase {
                a,
                b,
                spec,
                q,
                outcome,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    #[serde(rename = "LEMMA1")]
    First,
    #[serde(rename = "LEMMA2")]
    Second,
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::First => "LEMMA1",
            Lemma::Second => "LEMMA2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCase {
    pub index: usize,
    pub lemma: Lemma,
    pub spec: IpdSpec,
    pub outcome: std::result::Result<LimitStudy, String>,
}

/// Minimum separation between predicted limit points for a sampled set to
/// be accepted.
pub const LIMIT_SEPARATION: f64 = 0.25;

/// Smallest accepted `|ε / ζ_1|` limit. Near zero the root assigned to 0
/// moves like `ε / ratio`, outside the linear regime at the default ε.
pub const LIMIT_RATIO_FLOOR: f64 = 0.05;

/// Random admissible parameter sets for each lemma, each run through the
/// ε-study.
pub fn limit_suite(cfg: &RunConfig, sets: usize, eps: &[f64]) -> Vec<LimitCase> {
    let mut out = Vec::new();
    for (stream, lemma) in [(3000, Lemma::First), (3001, Lemma::Second)] {
        let mut s = Sampler::new(cfg.seed, stream, cfg);
        let mut made = 0;
        let mut attempts = 0;
        while made < sets && attempts < sets * MAX_RESAMPLES {
            attempts += 1;
            let spec = s.spec(1);
            let m = spec.m_total();
            let q = s.int(0, m - 1);
            let (a, b) = (s.a(), s.b());
            let params = match lemma {
                Lemma::First => LemmaParams::First { b },
                Lemma::Second => LemmaParams::Second { a, b },
            };
            if !limit_params_admissible(params, &spec, q, cfg.guard_band) {
                continue;
            }
            let outcome = lemma_limit_study(params, &spec, q, eps).map_err(|e| e.to_string());
            out.push(LimitCase {
                index: out.len(),
                lemma,
                spec,
                outcome,
            });
            made += 1;
        }
    }
    out
}

/// Lemma hypotheses with a guard band, plus separation of the predicted
/// limit points so that root assignment is unambiguous.
pub fn limit_params_admissible(params: LemmaParams, spec: &IpdSpec, q: usize, band: f64) -> bool {
    let m = spec.m_total();
    let (pivot, reduced) = match params {
        LemmaParams::First { b } => (b, crate::charpoly::r_poly(b, spec, q)),
        LemmaParams::Second { a, b } => {
            if distance_to_integer_range(a - b, q as i64 + 1 - m as i64, q as i64) < band {
                return false;
            }
            (a, rhat_poly(a, b, spec, q))
        }
    };
    if ipd_exclusion_distance(spec, pivot, q) < band {
        return false;
    }
    let reduced = match reduced {
        Ok(p) if !p.is_identically_zero() => p,
        _ => return false,
    };
    match crate::charpoly::predicted_ratio(params, spec, q) {
        Ok(r) if r.norm() >= LIMIT_RATIO_FLOOR => {}
        _ => return false,
    }
    let lam = match roots(&reduced) {
        Ok(r) => r.roots,
        Err(_) => return false,
    };
    let mut pts: Vec<Cx> = (0..=q).map(|l| cx(-(l as f64))).collect();
    pts.extend(lam);
    for i in 0..pts.len() {
        for j in 0..i {
            if (pts[i] - pts[j]).norm() < LIMIT_SEPARATION {
                return false;
            }
        }
    }
    true
}

/// Flat CSV of a limit-study run, one row per (set, ε).
pub fn limits_csv(cases: &[LimitCase]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidSpec(format!("csv: {e}"));
    w.write_record([
        "set",
        "lemma",
        "m",
        "q",
        "eps",
        "match_error",
        "ratio_re",
        "ratio_im",
        "predicted_ratio_re",
        "predicted_ratio_im",
        "extrapolated_ratio_re",
        "extrapolated_ratio_im",
        "ratio_rel_err",
        "slope",
        "error",
    ])
    .map_err(io)?;
    for c in cases {
        match &c.outcome {
            Ok(st) => {
                for row in &st.rows {
                    w.write_record(&[
                        c.index.to_string(),
                        c.lemma.to_string(),
                        format!("{:?}", c.spec.m),
                        st.q.to_string(),
                        format!("{:e}", row.eps),
                        format!("{:e}", row.match_error),
                        format!("{:e}", row.ratio.re),
                        format!("{:e}", row.ratio.im),
                        format!("{:e}", st.predicted_ratio.re),
                        format!("{:e}", st.predicted_ratio.im),
                        format!("{:e}", st.extrapolated_ratio.re),
                        format!("{:e}", st.extrapolated_ratio.im),
                        format!("{:e}", st.ratio_rel_err),
                        format!("{}", st.slope),
                        String::new(),
                    ])
                    .map_err(io)?;
                }
            }
            Err(e) => {
                let mut rec = vec![
                    c.index.to_string(),
                    c.lemma.to_string(),
                    format!("{:?}", c.spec.m),
                ];
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(e.clone());
                w.write_record(&rec).map_err(io)?;
            }
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidSpec(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig::parse(
            "# run\nseed = 7\ndraws=3\nidentities = MP1, thm4 ,COR7a\nrel_tol = 1e-8\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.draws, 3);
        assert_eq!(
            cfg.identities,
            vec![
                CaseId::Finite(IdentityId::Mp1),
                CaseId::Unit(UnitId::Thm4),
                CaseId::Unit(UnitId::Cor7a)
            ]
        );
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("x_box = 0.7").is_err());
        assert!(RunConfig::parse("draws").is_err());
    }

    #[test]
    fn case_id_serde() {
        let ids = CaseId::all();
        let s = serde_json::to_string(&ids).unwrap();
        let back: Vec<CaseId> = serde_json::from_str(&s).unwrap();
        assert_eq!(ids, back);
        assert!(s.contains("\"COR2alt\"") && s.contains("\"RED_LEMMA\""));
    }

    #[test]
    fn deterministic_reports() {
        let cfg = RunConfig {
            draws: 2,
            identities: parse_identities("MP1,THM3,THM5,EX4").unwrap(),
            ..RunConfig::default()
        };
        let r1 = run_check(&cfg).to_json_lines();
        let r2 = run_check(&cfg).to_json_lines();
        assert_eq!(r1, r2);
        let only = RunConfig {
            identities: parse_identities("THM3").unwrap(),
            ..cfg.clone()
        };
        let a = run_check(&cfg).for_identity(CaseId::Finite(IdentityId::Thm3));
        let b = run_check(&only);
        assert_eq!(
            a.records.iter().map(|r| r.rel_err).collect::<Vec<_>>(),
            b.records.iter().map(|r| r.rel_err).collect::<Vec<_>>()
        );
    }

    #[test]
    fn violated_case_is_flagged() {
        let spec = IpdSpec::real(&[1.5], &[2]).unwrap();
        let params = Params {
            a: Some(cx(0.3)),
            b: cx(0.5),
            c: Some(cx(2.5)),
            ..Params::default()
        };
        let case = IdentityCase {
            id: IdentityId::Mp1,
            params,
            spec,
            x: cx(0.2),
            tol: 1e-8,
        };
        let rec = run_case(0, &AnyCase::Finite(case));
        assert_eq!(rec.status, Status::ConstraintViolation);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn vanishing_sums_are_zero() {
        for c in vanishing_suite() {
            let r = c.outcome.unwrap();
            assert!(r.lhs.norm() <= 1e-7, "{:?} {}", c.spec, r.lhs);
            assert!(r.rhs.norm() <= 1e-12);
        }
    }

    #[test]
    fn beta_cases_agree() {
        let cases = beta_suite(&RunConfig::default(), 4);
        assert_eq!(cases.len(), 4);
        for c in cases {
            assert!(c.outcome.unwrap().rel_err < 1e-6);
        }
    }
}
