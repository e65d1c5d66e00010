//! Browser bindings. Each exported function takes a scenario as JSON text and
//! returns text (JSON, CSV or SVG); errors come back as `"<name>: <message>"`.

use wasm_bindgen::prelude::*;

use wmgame_core::region::{export_region_csv, feasibility_interval, render_region_svg, Axis};
use wmgame_core::{
    build_payoff_matrix, scan, solve_with, Error, Method, ReportDocument, Scenario, ScenarioDocument, SweepSpec,
};

fn describe(e: Error) -> String {
    format!("{}: {e}", e.name())
}

fn parse_scenario(json: &str) -> Result<Scenario, String> {
    let scenario = ScenarioDocument::from_json(json).map_err(describe)?.into_scenario();
    let report = scenario.validate();
    if !report.passed() {
        return Err(describe(Error::InvalidScenario(report.failures())));
    }
    Ok(scenario)
}

/// Equilibrium report as pretty JSON.
pub fn solve_report(scenario_json: &str, method: &str) -> Result<String, String> {
    let scenario = parse_scenario(scenario_json)?;
    let method: Method = method.parse().map_err(describe)?;
    let report = solve_with(&scenario, method).map_err(describe)?;
    Ok(serde_json::to_string_pretty(&ReportDocument::from(&report)).expect("plain data serialises"))
}

/// Payoff table as CSV with header `i,j,u_alice,u_bob`, 1-based.
pub fn payoff_table(scenario_json: &str) -> Result<String, String> {
    let matrix = build_payoff_matrix(&parse_scenario(scenario_json)?).map_err(describe)?;
    let mut out = String::from("i,j,u_alice,u_bob\n");
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                j + 1,
                matrix.alice(i, j),
                matrix.bob(i, j)
            ));
        }
    }
    Ok(out)
}

fn sweep(
    scenario_json: &str,
    axes: &[&str],
    couple_ongoing: bool,
) -> Result<Vec<wmgame_core::region::RegionPoint>, String> {
    let scenario = parse_scenario(scenario_json)?;
    let axes = axes
        .iter()
        .map(|a| a.parse::<Axis>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(describe)?;
    let mut spec = SweepSpec::new(scenario, axes);
    spec.couple_ongoing_costs = couple_ongoing;
    scan(&spec).map_err(describe)
}

/// Region map over two axes (`path:start:end:steps`) as an SVG document.
pub fn region_svg(scenario_json: &str, x_axis: &str, y_axis: &str, couple_ongoing: bool) -> Result<String, String> {
    let points = sweep(scenario_json, &[x_axis, y_axis], couple_ongoing)?;
    let mut out = Vec::new();
    render_region_svg(&points, &mut out).map_err(describe)?;
    Ok(String::from_utf8(out).expect("renderer writes UTF-8"))
}

/// Region points over one or two axes as CSV.
pub fn region_csv(scenario_json: &str, axes: &[&str], couple_ongoing: bool) -> Result<String, String> {
    let points = sweep(scenario_json, axes, couple_ongoing)?;
    let mut out = Vec::new();
    export_region_csv(&points, &mut out).map_err(describe)?;
    Ok(String::from_utf8(out).expect("exporter writes UTF-8"))
}

/// Interval of `beta_1 - beta_2` in which the defender mixes, as JSON
/// `{"lower": .., "upper": .., "orientation": ..}`.
pub fn interval_json(k: f64, d_r_1star: f64, d_r_2star: f64) -> Result<String, String> {
    let interval = feasibility_interval(k, d_r_1star, d_r_2star).map_err(describe)?;
    Ok(serde_json::to_string(&interval).expect("plain data serialises"))
}

fn js(result: Result<String, String>) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(scenario_json: &str, method: &str) -> Result<String, JsError> {
    js(solve_report(scenario_json, method))
}

#[wasm_bindgen]
pub fn payoffs(scenario_json: &str) -> Result<String, JsError> {
    js(payoff_table(scenario_json))
}

#[wasm_bindgen]
pub fn region(scenario_json: &str, x_axis: &str, y_axis: &str, couple_ongoing: bool) -> Result<String, JsError> {
    js(region_svg(scenario_json, x_axis, y_axis, couple_ongoing))
}

#[wasm_bindgen]
pub fn interval(k: f64, d_r_1star: f64, d_r_2star: f64) -> Result<String, JsError> {
    js(interval_json(k, d_r_1star, d_r_2star))
}
