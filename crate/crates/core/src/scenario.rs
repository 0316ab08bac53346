//! Scenario files, table reports and fee sweeps.
//!
//! A scenario is a flat JSON object:
//!
//! ```json
//! {"owner_wealth": 100000, "insurer_wealth": 1000000, "gain": 4000,
//!  "replacement_cost": 30000, "loss_probability": 0.05, "fee": 1800,
//!  "duration_months": 1, "utility_exponent": 0.5}
//! ```
//!
//! `utility_exponent` is optional (default 0.5) and may be the string `"log"`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fee_solver::{fee_sweep, SweepPoint};
use crate::gamble::{ContractTerms, PartyState, Role, VentureSpec};
use crate::paradigms::{party_gambles, rate, EvaluationReport, Paradigm, Units, UtilityFunction};

pub const DEFAULT_UTILITY_EXPONENT: f64 = 0.5;

pub const CSV_HEADER: &str = "fee,owner_delta,insurer_delta,owner_bankrupt,insurer_bankrupt";

const FIELDS: [&str; 8] = [
    "owner_wealth",
    "insurer_wealth",
    "gain",
    "replacement_cost",
    "loss_probability",
    "fee",
    "duration_months",
    "utility_exponent",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UtilitySpec {
    Exponent(f64),
    Log,
}

impl Serialize for UtilitySpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UtilitySpec::Exponent(a) => s.serialize_f64(*a),
            UtilitySpec::Log => s.serialize_str("log"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioFile {
    pub owner_wealth: f64,
    pub insurer_wealth: f64,
    pub gain: f64,
    pub replacement_cost: f64,
    pub loss_probability: f64,
    pub fee: f64,
    pub duration_months: f64,
    pub utility_exponent: UtilitySpec,
}

fn parse_error(path: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

fn validation_error(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

fn required_number(obj: &Map<String, Value>, field: &str) -> Result<f64> {
    match obj.get(field) {
        None => Err(parse_error(field, "missing required field")),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| parse_error(field, format!("expected a number, found {v}"))),
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_error("$", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| parse_error("$", "expected a JSON object"))?;
    if let Some(unknown) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(parse_error(unknown, "unknown field"));
    }
    let utility_exponent = match obj.get("utility_exponent") {
        None => UtilitySpec::Exponent(DEFAULT_UTILITY_EXPONENT),
        Some(Value::String(s)) if s == "log" => UtilitySpec::Log,
        Some(v) => UtilitySpec::Exponent(
            v.as_f64()
                .ok_or_else(|| parse_error("utility_exponent", format!("expected a number or \"log\", found {v}")))?,
        ),
    };
    let scenario = ScenarioFile {
        owner_wealth: required_number(obj, "owner_wealth")?,
        insurer_wealth: required_number(obj, "insurer_wealth")?,
        gain: required_number(obj, "gain")?,
        replacement_cost: required_number(obj, "replacement_cost")?,
        loss_probability: required_number(obj, "loss_probability")?,
        fee: required_number(obj, "fee")?,
        duration_months: required_number(obj, "duration_months")?,
        utility_exponent,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| parse_error(&path.display().to_string(), e.to_string()))?;
    load_scenario(&text)
}

impl ScenarioFile {
    /// The worked shipping example: a $4,000 voyage risking a $30,000 ship.
    pub fn canonical() -> Self {
        Self {
            owner_wealth: 100_000.0,
            insurer_wealth: 1_000_000.0,
            gain: 4_000.0,
            replacement_cost: 30_000.0,
            loss_probability: 0.05,
            fee: 1_800.0,
            duration_months: 1.0,
            utility_exponent: UtilitySpec::Exponent(DEFAULT_UTILITY_EXPONENT),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("owner_wealth", self.owner_wealth),
            ("insurer_wealth", self.insurer_wealth),
            ("duration_months", self.duration_months),
        ];
        for (field, x) in positive {
            if !(x.is_finite() && x > 0.0) {
                return Err(validation_error(field, format!("{x} must be > 0")));
            }
        }
        let non_negative = [
            ("gain", self.gain),
            ("replacement_cost", self.replacement_cost),
            ("fee", self.fee),
        ];
        for (field, x) in non_negative {
            if !(x.is_finite() && x >= 0.0) {
                return Err(validation_error(field, format!("{x} must be >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(validation_error(
                "loss_probability",
                format!("{} is not in [0, 1]", self.loss_probability),
            ));
        }
        if let UtilitySpec::Exponent(a) = self.utility_exponent {
            if !(a > 0.0 && a <= 1.0) {
                return Err(validation_error("utility_exponent", format!("{a} is not in (0, 1]")));
            }
        }
        Ok(())
    }

    /// Pretty JSON; `load_scenario` reads it back to an identical value.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }

    pub fn venture(&self) -> Result<VentureSpec> {
        VentureSpec::new(
            self.gain,
            self.replacement_cost,
            self.loss_probability,
            self.duration_months,
        )
    }

    pub fn contract(&self) -> Result<ContractTerms> {
        self.venture()?.contract(self.fee)
    }

    pub fn owner(&self) -> Result<PartyState> {
        PartyState::owner(self.owner_wealth)
    }

    pub fn insurer(&self) -> Result<PartyState> {
        PartyState::insurer(self.insurer_wealth)
    }

    pub fn utility(&self) -> Result<UtilityFunction> {
        match self.utility_exponent {
            UtilitySpec::Exponent(a) => UtilityFunction::power(a),
            UtilitySpec::Log => Ok(UtilityFunction::Logarithmic),
        }
    }

    pub fn paradigm(&self, kind: ParadigmKind) -> Result<Paradigm> {
        Ok(match kind {
            ParadigmKind::ExpectedWealth => Paradigm::ExpectedWealth,
            ParadigmKind::ExpectedUtility => Paradigm::ExpectedUtility(self.utility()?),
            ParadigmKind::TimeAverage => Paradigm::TimeAverage,
        })
    }
}

/// Paradigm selector used on the command line: `ew`, `eu` or `ta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParadigmKind {
    ExpectedWealth,
    ExpectedUtility,
    TimeAverage,
}

impl ParadigmKind {
    pub const ALL: [ParadigmKind; 3] = [
        ParadigmKind::ExpectedWealth,
        ParadigmKind::ExpectedUtility,
        ParadigmKind::TimeAverage,
    ];
}

impl FromStr for ParadigmKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ew" => Ok(ParadigmKind::ExpectedWealth),
            "eu" => Ok(ParadigmKind::ExpectedUtility),
            "ta" => Ok(ParadigmKind::TimeAverage),
            other => Err(format!("unknown paradigm `{other}` (expected ew, eu or ta)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Bankrupt,
    OutsideUtilityDomain,
}

/// A table entry: a number, or a flag where the rate does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Value(f64),
    Flag(CellFlag),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Flag(_) => None,
        }
    }

    fn from_error(e: &Error) -> Option<Cell> {
        match e {
            Error::Bankruptcy { .. } => Some(Cell::Flag(CellFlag::Bankrupt)),
            Error::Domain { .. } => Some(Cell::Flag(CellFlag::OutsideUtilityDomain)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Column {
    pub insured: Cell,
    pub uninsured: Cell,
    pub difference: Cell,
}

impl Column {
    pub fn cells(&self) -> [(&'static str, Cell); 3] {
        [
            ("insured", self.insured),
            ("uninsured", self.uninsured),
            ("difference", self.difference),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table {
    pub paradigm: Paradigm,
    pub units: Units,
    pub owner: Column,
    pub insurer: Column,
}

impl Table {
    pub fn column(&self, role: Role) -> &Column {
        match role {
            Role::Owner => &self.owner,
            Role::Insurer => &self.insurer,
        }
    }

    pub fn has_flags(&self) -> bool {
        [self.owner, self.insurer]
            .iter()
            .flat_map(|c| c.cells())
            .any(|(_, cell)| matches!(cell, Cell::Flag(_)))
    }
}

/// The three rate tables for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TablesReport {
    pub expected_wealth: Table,
    pub expected_utility: Table,
    pub time_average: Table,
}

impl TablesReport {
    pub fn table(&self, kind: ParadigmKind) -> &Table {
        match kind {
            ParadigmKind::ExpectedWealth => &self.expected_wealth,
            ParadigmKind::ExpectedUtility => &self.expected_utility,
            ParadigmKind::TimeAverage => &self.time_average,
        }
    }
}

fn build_column(
    paradigm: Paradigm,
    venture: &VentureSpec,
    contract: &ContractTerms,
    party: &PartyState,
) -> Result<Column> {
    let (insured, uninsured) = party_gambles(venture, contract, party.role());
    let cell = |r: Result<_>| -> Result<std::result::Result<crate::paradigms::RateValue, Cell>> {
        match r {
            Ok(v) => Ok(Ok(v)),
            Err(e) => Cell::from_error(&e).map(Err).ok_or(e),
        }
    };
    let with = cell(rate(paradigm, &insured, party.wealth()))?;
    let without = cell(rate(paradigm, &uninsured, party.wealth()))?;
    let to_cell = |r: &std::result::Result<crate::paradigms::RateValue, Cell>| match r {
        Ok(v) => Cell::Value(v.value),
        Err(c) => *c,
    };
    let difference = match (&with, &without) {
        (Ok(a), Ok(b)) => Cell::Value(EvaluationReport::new(paradigm, party.role(), *a, *b)?.delta.value),
        (Err(c), _) | (_, Err(c)) => *c,
    };
    Ok(Column {
        insured: to_cell(&with),
        uninsured: to_cell(&without),
        difference,
    })
}

/// Insured, uninsured and difference rates for both parties under all three
/// paradigms. Rates that do not exist are flagged rather than reported as errors.
pub fn emit_tables(scenario: &ScenarioFile) -> Result<TablesReport> {
    scenario.validate()?;
    let venture = scenario.venture()?;
    let contract = scenario.contract()?;
    let owner = scenario.owner()?;
    let insurer = scenario.insurer()?;
    let table = |kind: ParadigmKind| -> Result<Table> {
        let paradigm = scenario.paradigm(kind)?;
        Ok(Table {
            paradigm,
            units: paradigm.units(),
            owner: build_column(paradigm, &venture, &contract, &owner)?,
            insurer: build_column(paradigm, &venture, &contract, &insurer)?,
        })
    };
    Ok(TablesReport {
        expected_wealth: table(ParadigmKind::ExpectedWealth)?,
        expected_utility: table(ParadigmKind::ExpectedUtility)?,
        time_average: table(ParadigmKind::TimeAverage)?,
    })
}

/// `x` with four significant digits.
pub fn four_significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    let scale = 10f64.powi(3 - magnitude);
    let rounded = (x * scale).round() / scale;
    format!("{rounded:.decimals$}")
}

fn render_cell(cell: Cell, units: Units) -> String {
    match cell {
        Cell::Value(v) if units == Units::GrowthPerTime => format!("{}%", four_significant(100.0 * v)),
        Cell::Value(v) => four_significant(v),
        Cell::Flag(CellFlag::Bankrupt) => "bankrupt".into(),
        Cell::Flag(CellFlag::OutsideUtilityDomain) => "outside domain".into(),
    }
}

fn table_title(paradigm: &Paradigm) -> String {
    match paradigm {
        Paradigm::ExpectedWealth => "Expected wealth".into(),
        Paradigm::ExpectedUtility(UtilityFunction::Logarithmic) => "Expected utility, U = ln W".into(),
        Paradigm::ExpectedUtility(UtilityFunction::PowerMonomial { exponent, .. }) => {
            format!("Expected utility, U = W^{exponent}")
        }
        Paradigm::TimeAverage => "Time-average growth".into(),
    }
}

/// Human-readable tables; growth rates in percent per month.
pub fn render_tables_text(report: &TablesReport, kinds: &[ParadigmKind]) -> String {
    let mut out = String::new();
    for (i, kind) in kinds.iter().enumerate() {
        let t = report.table(*kind);
        if i > 0 {
            out.push('\n');
        }
        let units = if t.units == Units::GrowthPerTime {
            "%/month"
        } else {
            t.units.label()
        };
        let _ = writeln!(out, "{} ({units})", table_title(&t.paradigm));
        let _ = writeln!(out, "{:<12}{:>16}{:>16}", "", "owner", "insurer");
        for ((row, own), (_, ins)) in t.owner.cells().into_iter().zip(t.insurer.cells()) {
            let _ = writeln!(
                out,
                "{row:<12}{:>16}{:>16}",
                render_cell(own, t.units),
                render_cell(ins, t.units)
            );
        }
    }
    out
}

fn csv_number(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:e}")
    }
}

fn csv_cell(cell: Cell) -> String {
    match cell {
        Cell::Value(v) => csv_number(v),
        Cell::Flag(CellFlag::Bankrupt) => "bankrupt".into(),
        Cell::Flag(CellFlag::OutsideUtilityDomain) => "outside_domain".into(),
    }
}

/// Tables as CSV with columns `paradigm,party,row,value,units`.
pub fn render_tables_csv(report: &TablesReport, kinds: &[ParadigmKind]) -> String {
    let mut out = String::from("paradigm,party,row,value,units\n");
    for kind in kinds {
        let t = report.table(*kind);
        for role in [Role::Owner, Role::Insurer] {
            for (row, cell) in t.column(role).cells() {
                let _ = writeln!(
                    out,
                    "{},{role},{row},{},{}",
                    t.paradigm.short_name(),
                    csv_cell(cell),
                    t.units.label()
                );
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub paradigm: Paradigm,
    pub units: Units,
    pub scenario_hash: String,
    pub rows: Vec<SweepPoint>,
}

impl SweepOutput {
    /// CSV body: the fixed header row, then one row per fee in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_number(r.fee),
                csv_number(r.owner_delta),
                csv_number(r.insurer_delta),
                u8::from(r.owner_bankrupt()),
                u8::from(r.insurer_bankrupt())
            );
        }
        out
    }
}

/// `steps` evenly spaced fees from `fee_min` to `fee_max` inclusive.
pub fn fee_grid(fee_min: f64, fee_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(fee_min.is_finite() && fee_min >= 0.0) {
        return Err(Error::invalid("fee_min", format!("{fee_min} must be >= 0")));
    }
    if !(fee_max.is_finite() && fee_max > fee_min) {
        return Err(Error::invalid("fee_max", format!("{fee_max} must exceed fee_min")));
    }
    if steps < 2 {
        return Err(Error::invalid("steps", "at least two steps are required"));
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| {
            if i == last {
                fee_max
            } else {
                fee_min + (fee_max - fee_min) * (i as f64 / last as f64)
            }
        })
        .collect())
}

/// Both parties' deltas on an even fee grid.
pub fn emit_sweep(
    scenario: &ScenarioFile,
    kind: ParadigmKind,
    fee_min: f64,
    fee_max: f64,
    steps: usize,
) -> Result<SweepOutput> {
    scenario.validate()?;
    let paradigm = scenario.paradigm(kind)?;
    let grid = fee_grid(fee_min, fee_max, steps)?;
    let rows = fee_sweep(
        paradigm,
        &scenario.venture()?,
        &scenario.owner()?,
        &scenario.insurer()?,
        &grid,
    )?;
    Ok(SweepOutput {
        paradigm,
        units: paradigm.units(),
        scenario_hash: scenario.hash(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"{"owner_wealth": 100000, "insurer_wealth": 1000000, "gain": 4000,
        "replacement_cost": 30000, "loss_probability": 0.05, "fee": 1800, "duration_months": 1}"#;

    #[test]
    fn loads_canonical_with_default_utility() {
        let s = load_scenario(CANONICAL).unwrap();
        assert_eq!(s, ScenarioFile::canonical());
        assert_eq!(s.loss_probability, 0.05);
        assert_eq!(s.fee, 1800.0);
        assert_eq!(s.utility().unwrap(), UtilityFunction::sqrt());
    }

    #[test]
    fn log_utility_spec() {
        let text = CANONICAL.replace("\"fee\"", "\"utility_exponent\": \"log\", \"fee\"");
        let s = load_scenario(&text).unwrap();
        assert_eq!(s.utility_exponent, UtilitySpec::Log);
        assert_eq!(load_scenario(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn validation_names_the_field() {
        let text = CANONICAL.replace("0.05", "1.5");
        match load_scenario(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "loss_probability"),
            other => panic!("{other:?}"),
        }
        let text = CANONICAL.replace("\"duration_months\": 1", "\"duration_months\": 0");
        assert!(matches!(load_scenario(&text), Err(Error::Validation { field, .. }) if field == "duration_months"));
        let text = CANONICAL.replace("\"fee\"", "\"utility_exponent\": 2, \"fee\"");
        assert!(matches!(load_scenario(&text), Err(Error::Validation { field, .. }) if field == "utility_exponent"));
    }

    #[test]
    fn parse_errors_name_the_field() {
        let text = CANONICAL.replace("\"fee\": 1800, ", "");
        match load_scenario(&text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "fee"),
            other => panic!("{other:?}"),
        }
        let text = CANONICAL.replace("\"gain\": 4000", "\"gain\": \"lots\"");
        assert!(matches!(load_scenario(&text), Err(Error::Parse { path, .. }) if path == "gain"));
        let text = CANONICAL.replace("\"gain\"", "\"bonus\": 1, \"gain\"");
        assert!(matches!(load_scenario(&text), Err(Error::Parse { path, .. }) if path == "bonus"));
        assert!(matches!(load_scenario("[1, 2]"), Err(Error::Parse { path, .. }) if path == "$"));
        assert!(matches!(load_scenario("{"), Err(Error::Parse { .. })));
    }

    #[test]
    fn four_significant_digits() {
        assert_eq!(four_significant(2.1761491781512692), "2.176");
        assert_eq!(four_significant(0.0071971), "0.007197");
        assert_eq!(four_significant(-100.0), "-100.0");
        assert_eq!(four_significant(2300.0), "2300");
        assert_eq!(four_significant(123456.0), "123500");
        assert_eq!(four_significant(0.0), "0");
    }

    #[test]
    fn riskless_fee_is_pure_transfer() {
        let mut s = ScenarioFile::canonical();
        s.loss_probability = 0.0;
        let t = emit_tables(&s).unwrap().expected_wealth;
        assert_eq!(t.owner.difference, Cell::Value(-1800.0));
        assert_eq!(t.insurer.difference, Cell::Value(1800.0));
    }

    #[test]
    fn bankrupt_cells_are_flagged() {
        let mut s = ScenarioFile::canonical();
        s.insurer_wealth = 20000.0;
        let r = emit_tables(&s).unwrap();
        assert_eq!(r.time_average.insurer.insured, Cell::Flag(CellFlag::Bankrupt));
        assert_eq!(r.time_average.insurer.uninsured, Cell::Value(0.0));
        assert_eq!(r.time_average.insurer.difference, Cell::Flag(CellFlag::Bankrupt));
        assert!(r.time_average.has_flags());
        assert_eq!(
            r.expected_utility.insurer.insured,
            Cell::Flag(CellFlag::OutsideUtilityDomain)
        );
        assert!(!r.expected_wealth.has_flags());
    }

    #[test]
    fn csv_number_formatting() {
        assert_eq!(csv_number(1700.0), "1.7e3");
        assert_eq!(csv_number(-100.0), "-1e2");
        assert_eq!(csv_number(f64::NEG_INFINITY), "-inf");
        let x = 0.1 + 0.2;
        assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn grid_edges() {
        assert_eq!(fee_grid(0.0, 10.0, 2).unwrap(), vec![0.0, 10.0]);
        assert_eq!(fee_grid(0.0, 10.0, 3).unwrap(), vec![0.0, 5.0, 10.0]);
        assert!(fee_grid(10.0, 10.0, 3).is_err());
        assert!(fee_grid(0.0, 10.0, 1).is_err());
        assert!(fee_grid(-1.0, 10.0, 3).is_err());
    }

    #[test]
    fn sweep_header_and_row_count() {
        let out = emit_sweep(
            &ScenarioFile::canonical(),
            ParadigmKind::ExpectedWealth,
            1700.0,
            1800.0,
            2,
        )
        .unwrap();
        let csv = out.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(out.units, Units::MoneyPerTime);
        assert_eq!(out.scenario_hash.len(), 64);
    }
}
