//! Automaton definitions, the JSON spec format and validation.
//!
//! A [`ModelSpec`] stores every index 0-based. Human-facing outputs (CSV
//! headers, CLI messages) label primary states 1..N.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numbers::gcd;

/// Ratio of crossing count to sublattice size above which a pair is flagged
/// as leaving the slow/fast separated regime.
pub const PERTURBATIVE_RATIO_LIMIT: f64 = 0.1;

/// Positive rational time quantum `δt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeQuantum(Ratio<u64>);

impl TimeQuantum {
    pub const ONE: TimeQuantum = TimeQuantum(Ratio::new_raw(1, 1));

    /// Panics if `denom` is zero.
    pub fn new(numer: u64, denom: u64) -> Self {
        TimeQuantum(Ratio::new(numer, denom))
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn as_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero()
    }
}

impl Default for TimeQuantum {
    fn default() -> Self {
        TimeQuantum::ONE
    }
}

impl fmt::Display for TimeQuantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for TimeQuantum {
    type Err = String;

    /// Accepts `p/q`, integers and plain or exponent decimals (`0.25`, `1e-3`),
    /// converted exactly.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
            let q: u64 = q.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
            if q == 0 {
                return Err(format!("zero denominator in `{s}`"));
            }
            return Ok(TimeQuantum::new(p, q));
        }
        parse_decimal(s).map(TimeQuantum).ok_or_else(|| format!("`{s}` is not a non-negative rational"))
    }
}

fn parse_decimal(s: &str) -> Option<Ratio<u64>> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let mantissa = mantissa.strip_prefix('+').unwrap_or(mantissa);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: u128 = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let (numer, denom) = if scale >= 0 {
        (numer.checked_mul(10u128.checked_pow(scale as u32)?)?, 1u128)
    } else {
        (numer, 10u128.checked_pow((-scale) as u32)?)
    };
    let r = Ratio::new(numer, denom);
    Some(Ratio::new(u64::try_from(*r.numer()).ok()?, u64::try_from(*r.denom()).ok()?))
}

impl Serialize for TimeQuantum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.denom() == 1 {
            serializer.serialize_u64(self.numer())
        } else {
            serializer.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for TimeQuantum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct QuantumVisitor;

        impl Visitor<'_> for QuantumVisitor {
            type Value = TimeQuantum;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or a \"p/q\" string")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<TimeQuantum, E> {
                Ok(TimeQuantum::new(v, 1))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<TimeQuantum, E> {
                u64::try_from(v).map(|v| TimeQuantum::new(v, 1)).map_err(|_| E::custom("time quantum must be positive"))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<TimeQuantum, E> {
                if !v.is_finite() || v < 0.0 {
                    return Err(E::custom("time quantum must be positive"));
                }
                // Display yields the shortest decimal that round-trips.
                format!("{v}").parse().map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<TimeQuantum, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(QuantumVisitor)
    }
}

/// Swap orientation of a crossing point. It changes only the sign of the
/// corresponding generator entry; classically a swap is a swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrossingPoint {
    /// `(i, j)` with `i < j` in a valid spec.
    pub pair: (usize, usize),
    /// Lattice coordinates `(k_i, k_j)` at which the swap fires.
    pub site: (u64, u64),
    pub sign: Sign,
}

impl CrossingPoint {
    pub fn new(pair: (usize, usize), site: (u64, u64), sign: Sign) -> Self {
        CrossingPoint { pair, site, sign }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub n_primary: usize,
    pub periods: Vec<u64>,
    pub delta_t: TimeQuantum,
    pub crossings: Vec<CrossingPoint>,
    /// Set when the spec realises a complex Hamiltonian; states `i` and
    /// `i + N/2` are the real and imaginary c-bit partners.
    pub cbit_doubled: bool,
}

/// Per-pair crossing statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCount {
    pub count: u64,
    pub signed: i64,
}

impl ModelSpec {
    pub fn new(periods: Vec<u64>, crossings: Vec<CrossingPoint>) -> Self {
        ModelSpec { n_primary: periods.len(), periods, delta_t: TimeQuantum::ONE, crossings, cbit_doubled: false }
    }

    pub fn with_delta_t(mut self, delta_t: TimeQuantum) -> Self {
        self.delta_t = delta_t;
        self
    }

    /// Crossing counts and signed sums keyed by pair, in canonical `(i, j)` order.
    pub fn pair_counts(&self) -> BTreeMap<(usize, usize), PairCount> {
        let mut out: BTreeMap<(usize, usize), PairCount> = BTreeMap::new();
        for c in &self.crossings {
            let e = out.entry(c.pair).or_default();
            e.count += 1;
            e.signed += c.sign.value();
        }
        out
    }

    /// Number of fast-lattice points, `∏ L_i`.
    pub fn fast_volume(&self) -> Result<u64> {
        self.periods.iter().try_fold(1u64, |acc, &l| acc.checked_mul(l)).ok_or(Error::Overflow("fast lattice volume"))
    }

    /// Logical state count: `N`, or `N/2` for a c-bit doubled spec.
    pub fn logical_dim(&self) -> usize {
        if self.cbit_doubled {
            self.n_primary / 2
        } else {
            self.n_primary
        }
    }

    /// Returns an error carrying every validation error message when the spec
    /// is not valid.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_spec(self);
        if report.ok {
            Ok(())
        } else {
            let msgs: Vec<String> = report.errors().map(|i| i.to_string()).collect();
            Err(Error::InvalidSpec(msgs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IssueCode {
    EmptyModel,
    PeriodCount,
    PeriodTooSmall,
    NotCoprime,
    DeltaTNonPositive,
    CbitOddDimension,
    PairOutOfRange,
    SiteOutOfRange,
    DuplicateSite,
    TooManyCrossings,
    Perturbativity,
    SimultaneousCrossings,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::EmptyModel => "EMPTY_MODEL",
            IssueCode::PeriodCount => "PERIOD_COUNT",
            IssueCode::PeriodTooSmall => "PERIOD_TOO_SMALL",
            IssueCode::NotCoprime => "NOT_COPRIME",
            IssueCode::DeltaTNonPositive => "DELTA_T_NONPOSITIVE",
            IssueCode::CbitOddDimension => "CBIT_ODD_DIMENSION",
            IssueCode::PairOutOfRange => "PAIR_OUT_OF_RANGE",
            IssueCode::SiteOutOfRange => "SITE_OUT_OF_RANGE",
            IssueCode::DuplicateSite => "DUPLICATE_SITE",
            IssueCode::TooManyCrossings => "TOO_MANY_CROSSINGS",
            IssueCode::Perturbativity => "PERTURBATIVITY",
            IssueCode::SimultaneousCrossings => "SIMULTANEOUS_CROSSINGS",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub code: IssueCode,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        let ok = issues.iter().all(|i| i.severity != Severity::Error);
        ValidationReport { ok, issues }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.ok { "ok" } else { "invalid" })?;
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `spec`. Never fails; problems are
/// report contents.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |severity, code, message: String| issues.push(Issue { severity, code, message });

    let n = spec.n_primary;
    if n == 0 {
        push(Severity::Error, IssueCode::EmptyModel, "n_primary must be at least 1".into());
    }
    if spec.periods.len() != n {
        push(
            Severity::Error,
            IssueCode::PeriodCount,
            format!("{} periods given for {} primary states", spec.periods.len(), n),
        );
    }
    for (i, &l) in spec.periods.iter().enumerate() {
        if l < 2 {
            push(Severity::Error, IssueCode::PeriodTooSmall, format!("period L_{} = {l} is below 2", i + 1));
        }
    }
    for i in 0..spec.periods.len() {
        for j in i + 1..spec.periods.len() {
            let g = gcd(spec.periods[i], spec.periods[j]);
            if g != 1 {
                push(
                    Severity::Error,
                    IssueCode::NotCoprime,
                    format!(
                        "periods L_{} = {} and L_{} = {} share the factor {g}",
                        i + 1,
                        spec.periods[i],
                        j + 1,
                        spec.periods[j]
                    ),
                );
            }
        }
    }
    if !spec.delta_t.is_positive() {
        push(Severity::Error, IssueCode::DeltaTNonPositive, "delta_t must be positive".into());
    }
    if spec.cbit_doubled && !n.is_multiple_of(2) {
        push(Severity::Error, IssueCode::CbitOddDimension, format!("cbit_doubled requires an even n_primary, got {n}"));
    }

    let period = |i: usize| spec.periods.get(i).copied();
    let mut seen: BTreeMap<(usize, usize), BTreeSet<(u64, u64)>> = BTreeMap::new();
    for (idx, c) in spec.crossings.iter().enumerate() {
        let (i, j) = c.pair;
        if !(i < j && j < n) {
            push(
                Severity::Error,
                IssueCode::PairOutOfRange,
                format!("crossing #{idx} has pair ({i}, {j}); need 0 <= i < j < {n}"),
            );
            continue;
        }
        let (Some(li), Some(lj)) = (period(i), period(j)) else {
            continue;
        };
        let (a, b) = c.site;
        if a >= li || b >= lj {
            push(
                Severity::Error,
                IssueCode::SiteOutOfRange,
                format!("crossing #{idx} site ({a}, {b}) outside the {li}x{lj} sublattice of pair ({i}, {j})"),
            );
            continue;
        }
        if !seen.entry(c.pair).or_default().insert(c.site) {
            push(
                Severity::Error,
                IssueCode::DuplicateSite,
                format!("crossing #{idx} repeats site ({a}, {b}) on pair ({i}, {j})"),
            );
        }
    }

    for (&(i, j), sites) in &seen {
        let (Some(li), Some(lj)) = (period(i), period(j)) else {
            continue;
        };
        let capacity = li as u128 * lj as u128;
        let count = sites.len() as u128;
        if count > capacity {
            push(
                Severity::Error,
                IssueCode::TooManyCrossings,
                format!("pair ({i}, {j}) has {count} crossings on {capacity} sites"),
            );
        }
        let ratio = count as f64 / capacity as f64;
        if ratio > PERTURBATIVE_RATIO_LIMIT {
            push(
                Severity::Warning,
                IssueCode::Perturbativity,
                format!("pair ({i}, {j}) occupies {ratio:.3} of its sublattice (> {PERTURBATIVE_RATIO_LIMIT})"),
            );
        }
    }

    // Two crossings on pairs sharing state s can fire in the same step exactly
    // when they agree on the coordinate of s; the other two coordinates belong
    // to distinct coprime periods and align for some initial conditions.
    let pairs: Vec<_> = seen.iter().collect();
    for (x, (&p, sites_p)) in pairs.iter().enumerate() {
        for (&q, sites_q) in pairs.iter().skip(x + 1) {
            let Some(shared) = shared_state(p, q) else {
                continue;
            };
            let coord = |pair: (usize, usize), site: &(u64, u64)| if pair.0 == shared { site.0 } else { site.1 };
            let on_p: BTreeSet<u64> = sites_p.iter().map(|s| coord(p, s)).collect();
            let clash = sites_q.iter().any(|s| on_p.contains(&coord(q, s)));
            if clash {
                push(
                    Severity::Warning,
                    IssueCode::SimultaneousCrossings,
                    format!(
                        "pairs ({}, {}) and ({}, {}) have crossings that can fire in the same step; \
                         swaps apply in (i, j) order",
                        p.0, p.1, q.0, q.1
                    ),
                );
            }
        }
    }

    ValidationReport::from_issues(issues)
}

fn shared_state(p: (usize, usize), q: (usize, usize)) -> Option<usize> {
    [p.0, p.1].into_iter().find(|s| *s == q.0 || *s == q.1)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    n_primary: usize,
    periods: Vec<u64>,
    #[serde(default)]
    delta_t: TimeQuantum,
    #[serde(default)]
    cbit_doubled: bool,
    crossings: Vec<CrossingFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossingFile {
    pair: [usize; 2],
    site: [u64; 2],
    sign: i64,
}

/// Parses a JSON spec document. Structural invariants are *not* checked here;
/// run [`validate_spec`] on the result.
pub fn parse_spec(text: &str) -> Result<ModelSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: SpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            let field = missing_or_unknown_field(&inner.to_string()).unwrap_or(path);
            Error::Schema { field, message: inner.to_string() }
        } else {
            Error::Syntax { line: inner.line(), column: inner.column(), message: inner.to_string() }
        }
    })?;

    let crossings = file
        .crossings
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let sign = match c.sign {
                1 => Sign::Plus,
                -1 => Sign::Minus,
                other => {
                    return Err(Error::Schema {
                        field: format!("crossings[{idx}].sign"),
                        message: format!("sign must be +1 or -1, got {other}"),
                    })
                }
            };
            Ok(CrossingPoint::new((c.pair[0], c.pair[1]), (c.site[0], c.site[1]), sign))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ModelSpec {
        n_primary: file.n_primary,
        periods: file.periods,
        delta_t: file.delta_t,
        crossings,
        cbit_doubled: file.cbit_doubled,
    })
}

fn missing_or_unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("missing field `").or_else(|| message.strip_prefix("unknown field `"))?;
    rest.split('`').next().map(str::to_owned)
}

pub fn serialize_spec(spec: &ModelSpec) -> String {
    let file = SpecFile {
        n_primary: spec.n_primary,
        periods: spec.periods.clone(),
        delta_t: spec.delta_t,
        cbit_doubled: spec.cbit_doubled,
        crossings: spec
            .crossings
            .iter()
            .map(|c| CrossingFile { pair: [c.pair.0, c.pair.1], site: [c.site.0, c.site.1], sign: c.sign.value() })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("spec serialization is infallible");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn two_state(periods: (u64, u64), site: (u64, u64)) -> ModelSpec {
        ModelSpec::new(vec![periods.0, periods.1], vec![CrossingPoint::new((0, 1), site, Sign::Plus)])
    }

    #[test]
    fn valid_two_state_spec() {
        let report = validate_spec(&two_state((3, 5), (0, 0)));
        assert!(report.ok, "{report}");
        assert!(report.issues.is_empty());
    }

    #[test]
    fn rejects_shared_factor() {
        let report = validate_spec(&ModelSpec::new(vec![4, 6], vec![]));
        assert!(!report.ok);
        assert!(report.has(IssueCode::NotCoprime));
        assert!(report.errors().any(|i| i.message.contains("factor 2")));
    }

    #[test]
    fn rejects_site_outside_sublattice() {
        let report = validate_spec(&two_state((3, 5), (3, 2)));
        assert!(!report.ok);
        assert!(report.has(IssueCode::SiteOutOfRange));
    }

    #[test]
    fn rejects_bad_pairs_and_periods() {
        let mut spec = ModelSpec::new(vec![1, 5], vec![CrossingPoint::new((1, 0), (0, 0), Sign::Plus)]);
        spec.crossings.push(CrossingPoint::new((0, 2), (0, 0), Sign::Plus));
        let report = validate_spec(&spec);
        assert!(report.has(IssueCode::PeriodTooSmall));
        assert_eq!(report.errors().filter(|i| i.code == IssueCode::PairOutOfRange).count(), 2);

        let mut spec = ModelSpec::new(vec![3, 5, 7], vec![]);
        spec.cbit_doubled = true;
        spec.n_primary = 4;
        let report = validate_spec(&spec);
        assert!(report.has(IssueCode::PeriodCount));
        assert!(!report.has(IssueCode::CbitOddDimension));
        spec.n_primary = 3;
        assert!(validate_spec(&spec).has(IssueCode::CbitOddDimension));

        let spec = ModelSpec::new(vec![3, 5], vec![]).with_delta_t(TimeQuantum::new(0, 1));
        assert!(validate_spec(&spec).has(IssueCode::DeltaTNonPositive));
    }

    #[test]
    fn dense_pairs_warn_but_pass() {
        let crossings = (0..3).map(|a| CrossingPoint::new((0, 1), (a, a), Sign::Plus)).collect();
        let report = validate_spec(&ModelSpec::new(vec![3, 5], crossings));
        assert!(report.ok);
        assert!(report.has(IssueCode::Perturbativity));
        assert_eq!(report.errors().count(), 0);
    }

    #[test]
    fn overlapping_pairs_sharing_a_coordinate_warn() {
        let spec = ModelSpec::new(
            vec![3, 5, 7],
            vec![CrossingPoint::new((0, 1), (1, 0), Sign::Plus), CrossingPoint::new((0, 2), (1, 4), Sign::Plus)],
        );
        assert!(validate_spec(&spec).has(IssueCode::SimultaneousCrossings));

        let spec = ModelSpec::new(
            vec![3, 5, 7],
            vec![CrossingPoint::new((0, 1), (1, 0), Sign::Plus), CrossingPoint::new((0, 2), (2, 4), Sign::Plus)],
        );
        assert!(!validate_spec(&spec).has(IssueCode::SimultaneousCrossings));
    }

    const MINIMAL: &str = r#"{
        "n_primary": 2,
        "periods": [3, 5],
        "crossings": [ { "pair": [0, 1], "site": [0, 0], "sign": 1 } ]
    }"#;

    #[test]
    fn parses_minimal_document() {
        let spec = parse_spec(MINIMAL).unwrap();
        assert_eq!(spec, two_state((3, 5), (0, 0)));
        assert_eq!(spec.delta_t, TimeQuantum::ONE);
        assert!(!spec.cbit_doubled);
    }

    #[test]
    fn missing_periods_names_the_field() {
        let err = parse_spec(r#"{"n_primary": 2, "crossings": []}"#).unwrap_err();
        match err {
            Error::Schema { field, .. } => assert_eq!(field, "periods"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_bad_signs_are_schema_errors() {
        let err = parse_spec(r#"{"n_primary": 2, "periods": [3,5], "crossings": [], "extra": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "extra"), "{err}");

        let err =
            parse_spec(r#"{"n_primary": 2, "periods": [3,5], "crossings": [{"pair":[0,1],"site":[0,0],"sign":2}]}"#)
                .unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "crossings[0].sign"), "{err}");

        let err = parse_spec(r#"{"n_primary": 2, "periods": [3,"x"], "crossings": []}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref field, .. } if field == "periods[1]"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_spec("{\n  \"n_primary\": 2,\n  \"periods\": [3, 5\n").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert!(line >= 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_sites_parse_then_fail_validation() {
        let text = r#"{"n_primary": 2, "periods": [3,5], "crossings": [
            {"pair":[0,1],"site":[1,2],"sign":1}, {"pair":[0,1],"site":[1,2],"sign":-1}]}"#;
        let spec = parse_spec(text).unwrap();
        let report = validate_spec(&spec);
        assert!(report.has(IssueCode::DuplicateSite));
        assert!(!report.ok);
    }

    #[test]
    fn time_quantum_forms() {
        let parse = |s: &str| parse_spec(&format!(r#"{{"n_primary":1,"periods":[2],"crossings":[],"delta_t":{s}}}"#));
        assert_eq!(parse("0.25").unwrap().delta_t, TimeQuantum::new(1, 4));
        assert_eq!(parse("\"3/7\"").unwrap().delta_t, TimeQuantum::new(3, 7));
        assert_eq!(parse("2").unwrap().delta_t, TimeQuantum::new(2, 1));
        assert_eq!(parse("1e-3").unwrap().delta_t, TimeQuantum::new(1, 1000));
        assert!(parse("-1").is_err());
        assert_eq!("2.5e1".parse::<TimeQuantum>().unwrap(), TimeQuantum::new(25, 1));
    }

    #[test]
    fn validation_is_deterministic() {
        let spec = ModelSpec::new(vec![4, 6, 9], vec![CrossingPoint::new((0, 2), (7, 7), Sign::Minus)]);
        assert_eq!(validate_spec(&spec), validate_spec(&spec));
    }

    fn arb_spec() -> impl Strategy<Value = ModelSpec> {
        let periods = prop::sample::subsequence(vec![2u64, 3, 5, 7, 11, 13], 1..=4);
        (periods, any::<bool>(), 1u64..20, 1u64..20).prop_flat_map(|(periods, doubled, p, q)| {
            let n = periods.len();
            let crossing = (0..n, 0..n, any::<u64>(), any::<u64>(), any::<bool>());
            (Just(periods), Just(doubled), Just(TimeQuantum::new(p, q)), prop::collection::vec(crossing, 0..6))
                .prop_map(move |(periods, doubled, dt, raw)| {
                    let periods_c = periods.clone();
                    let crossings = raw
                        .into_iter()
                        .filter(|(i, j, ..)| i < j)
                        .map(|(i, j, a, b, s)| {
                            CrossingPoint::new(
                                (i, j),
                                (a % periods_c[i], b % periods_c[j]),
                                if s { Sign::Plus } else { Sign::Minus },
                            )
                        })
                        .collect();
                    let mut spec = ModelSpec::new(periods, crossings).with_delta_t(dt);
                    spec.cbit_doubled = doubled && n % 2 == 0;
                    spec
                })
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_serialize(spec in arb_spec()) {
            let text = serialize_spec(&spec);
            prop_assert_eq!(parse_spec(&text).unwrap(), spec);
        }
    }
}
