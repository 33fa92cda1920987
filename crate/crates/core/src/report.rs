//! Static renderings: Gantt charts (SVG and plain text) and the
//! tasks-per-agent bar chart.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::harness::Metrics;
use crate::model::FinalSchedule;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn agent_colours(schedule: &FinalSchedule) -> BTreeMap<&str, &'static str> {
    let mut agents: Vec<&str> = schedule.placements.iter().map(|p| p.agent_id.as_str()).collect();
    agents.sort_unstable();
    agents.dedup();
    agents
        .into_iter()
        .enumerate()
        .map(|(i, a)| (a, PALETTE[i % PALETTE.len()]))
        .collect()
}

/// One row per task (in schedule order), time on the horizontal axis,
/// bars coloured by agent and labelled with the resource.
pub fn gantt_svg(schedule: &FinalSchedule) -> String {
    const LEFT: f64 = 80.0;
    const WIDTH: f64 = 720.0;
    const ROW: f64 = 22.0;
    const TOP: f64 = 30.0;

    let rows = schedule.placements.len();
    let span = schedule.makespan.as_secs_f64().max(1e-9);
    let scale = WIDTH / span;
    let height = TOP + ROW * rows as f64 + 40.0;
    let colours = agent_colours(schedule);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" font-family="monospace" font-size="11">"#,
        LEFT + WIDTH + 20.0
    );
    for (i, p) in schedule.placements.iter().enumerate() {
        let y = TOP + ROW * i as f64;
        let x = LEFT + p.start.as_secs_f64() * scale;
        let w = ((p.end - p.start).as_secs_f64() * scale).max(1.0);
        let _ = writeln!(
            out,
            r#"  <text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 15.0,
            escape(&p.task_id)
        );
        let _ = writeln!(
            out,
            r#"  <rect x="{x:.2}" y="{:.1}" width="{w:.2}" height="{:.1}" fill="{}"><title>{} on {} ({}) [{}, {})</title></rect>"#,
            y + 3.0,
            ROW - 6.0,
            colours[p.agent_id.as_str()],
            escape(&p.task_id),
            escape(&p.resource_id),
            escape(&p.agent_id),
            p.start,
            p.end
        );
        let _ = writeln!(
            out,
            r##"  <text x="{:.2}" y="{:.1}" fill="#fff">{}</text>"##,
            x + 2.0,
            y + 15.0,
            escape(&p.resource_id)
        );
    }
    let axis_y = TOP + ROW * rows as f64 + 10.0;
    let _ = writeln!(
        out,
        r##"  <line x1="{LEFT}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="#000"/>"##,
        LEFT + WIDTH
    );
    for k in 0..=10 {
        let x = LEFT + WIDTH * k as f64 / 10.0;
        let label = span * k as f64 / 10.0;
        let _ = writeln!(
            out,
            r#"  <text x="{x:.1}" y="{:.1}" text-anchor="middle">{label:.1}</text>"#,
            axis_y + 15.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Plain-text Gantt chart, `width` columns of timeline per row.
pub fn gantt_text(schedule: &FinalSchedule, width: usize) -> String {
    let width = width.max(10);
    let span = schedule.makespan.as_micros().max(1) as i128;
    let label = schedule
        .placements
        .iter()
        .map(|p| p.task_id.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let column = |t: i128| ((t * width as i128) / span) as usize;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>label$} |{}| resource (agent) [start, end)",
        "task",
        "-".repeat(width)
    );
    for p in &schedule.placements {
        let from = column(p.start.as_micros() as i128).min(width);
        let to = column(p.end.as_micros() as i128).clamp(from, width);
        let mut bar = vec![' '; width];
        for cell in &mut bar[from..to] {
            *cell = '#';
        }
        if from == to && from < width {
            bar[from] = '|';
        }
        let bar: String = bar.into_iter().collect();
        let _ = writeln!(
            out,
            "{:>label$} |{bar}| {} ({}) [{}, {})",
            p.task_id, p.resource_id, p.agent_id, p.start, p.end
        );
    }
    let _ = writeln!(
        out,
        "{:>label$} 0{}{}",
        "",
        " ".repeat(width.saturating_sub(1)),
        schedule.makespan
    );
    out
}

/// Bar chart of tasks scheduled per agent.
pub fn tasks_per_agent_svg(metrics: &Metrics) -> String {
    const BAR: f64 = 60.0;
    const GAP: f64 = 30.0;
    const HEIGHT: f64 = 200.0;
    let max = metrics.tasks_per_agent.values().copied().max().unwrap_or(0).max(1) as f64;
    let width = GAP + (BAR + GAP) * metrics.tasks_per_agent.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{:.0}" font-family="monospace" font-size="11">"#,
        HEIGHT + 60.0
    );
    for (i, (agent, &count)) in metrics.tasks_per_agent.iter().enumerate() {
        let x = GAP + (BAR + GAP) * i as f64;
        let h = HEIGHT * count as f64 / max;
        let y = 20.0 + HEIGHT - h;
        let _ = writeln!(
            out,
            r#"  <rect x="{x:.1}" y="{y:.1}" width="{BAR}" height="{h:.1}" fill="{}"/>"#,
            PALETTE[i % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"  <text x="{:.1}" y="{:.1}" text-anchor="middle">{count}</text>"#,
            x + BAR / 2.0,
            y - 4.0
        );
        let _ = writeln!(
            out,
            r#"  <text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x + BAR / 2.0,
            HEIGHT + 40.0,
            escape(agent)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Placement;
    use crate::time::Seconds;

    fn schedule() -> FinalSchedule {
        let place = |id: &str, r: &str, a: &str, s: i64, e: i64| Placement {
            task_id: id.into(),
            resource_id: r.into(),
            agent_id: a.into(),
            start: Seconds::from_secs(s),
            end: Seconds::from_secs(e),
        };
        FinalSchedule {
            placements: vec![place("1", "P01", "agent1", 0, 5), place("2", "P03", "agent2", 5, 10)],
            makespan: Seconds::from_secs(10),
            deadline_violations: vec![],
        }
    }

    #[test]
    fn text_gantt_scales_bars() {
        let text = gantt_text(&schedule(), 10);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "   1 |#####     | P01 (agent1) [0, 5)");
        assert_eq!(lines[2], "   2 |     #####| P03 (agent2) [5, 10)");
    }

    #[test]
    fn svg_gantt_has_a_bar_per_task() {
        let svg = gantt_svg(&schedule());
        assert_eq!(svg.matches("<rect").count(), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_schedule_renders() {
        let empty = FinalSchedule::default();
        assert!(gantt_svg(&empty).contains("</svg>"));
        assert_eq!(gantt_text(&empty, 10).lines().count(), 2);
    }
}
