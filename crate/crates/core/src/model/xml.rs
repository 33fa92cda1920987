//! Task and resource XML files.
//!
//! Task files hold one or more `<task>` elements (either as the document
//! root or anywhere under a wrapper element). Resource files hold `<Node>`
//! elements, likewise. Unknown elements are skipped with a warning.

use std::fmt::Write;

use roxmltree::{Document, Node};

use super::{Dependency, ResourceSet, ResourceSpec, TaskSet, TaskSpec};
use crate::error::{Error, Result};
use crate::time::Seconds;

pub fn parse_task_file(text: &str) -> Result<TaskSet> {
    if text.trim().is_empty() {
        return Ok(TaskSet::default());
    }
    let doc = parse_document(text)?;
    let mut tasks = Vec::new();
    for node in top_level(&doc, "task") {
        let task = parse_task(&doc, node)?;
        if tasks.iter().any(|t: &TaskSpec| t.task_id == task.task_id) {
            return Err(Error::Duplicate {
                kind: "task",
                id: task.task_id,
            });
        }
        tasks.push(task);
    }
    TaskSet::new(tasks)
}

pub fn parse_resource_file(text: &str) -> Result<ResourceSet> {
    if text.trim().is_empty() {
        return Ok(ResourceSet::default());
    }
    let doc = parse_document(text)?;
    let mut resources = Vec::new();
    for node in top_level(&doc, "Node") {
        let resource = parse_node(&doc, node)?;
        if resources.iter().any(|r: &ResourceSpec| r.id == resource.id) {
            return Err(Error::Duplicate {
                kind: "resource",
                id: resource.id,
            });
        }
        resources.push(resource);
    }
    ResourceSet::new(resources)
}

fn parse_document(text: &str) -> Result<Document<'_>> {
    Document::parse(text).map_err(|e| {
        let pos = e.pos();
        Error::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })
}

/// Elements named `tag` that are not nested inside another `tag`.
fn top_level<'a, 'input>(doc: &'a Document<'input>, tag: &'a str) -> Vec<Node<'a, 'input>> {
    doc.root_element()
        .descendants()
        .filter(|n| n.has_tag_name(tag))
        .filter(|n| !n.ancestors().skip(1).any(|a| a.has_tag_name(tag)))
        .collect()
}

fn line_of(doc: &Document<'_>, node: Node<'_, '_>) -> u32 {
    doc.text_pos_at(node.range().start).row
}

fn invalid(doc: &Document<'_>, node: Node<'_, '_>, message: impl Into<String>) -> Error {
    Error::Invalid {
        element: node.tag_name().name().to_string(),
        line: line_of(doc, node),
        message: message.into(),
    }
}

fn text_of<'a>(node: Node<'a, '_>) -> &'a str {
    node.text().map(str::trim).unwrap_or("")
}

fn nonempty_text(doc: &Document<'_>, node: Node<'_, '_>) -> Result<String> {
    let text = text_of(node);
    if text.is_empty() {
        return Err(invalid(doc, node, "empty value"));
    }
    Ok(text.to_string())
}

fn seconds(doc: &Document<'_>, node: Node<'_, '_>) -> Result<Seconds> {
    let value: Seconds = text_of(node).parse().map_err(|e| invalid(doc, node, format!("{e}")))?;
    if value.is_negative() {
        return Err(invalid(doc, node, format!("negative value {value}")));
    }
    Ok(value)
}

fn amount(doc: &Document<'_>, node: Node<'_, '_>) -> Result<f64> {
    let text = text_of(node);
    let value: f64 = text
        .parse()
        .map_err(|_| invalid(doc, node, format!("`{text}` is not a decimal number")))?;
    if !value.is_finite() {
        return Err(invalid(doc, node, format!("`{text}` is not finite")));
    }
    if value < 0.0 {
        return Err(invalid(doc, node, format!("negative value {text}")));
    }
    Ok(value)
}

fn warn_unknown(doc: &Document<'_>, node: Node<'_, '_>) {
    log::warn!(
        "ignoring unknown element <{}> at line {}",
        node.tag_name().name(),
        line_of(doc, node)
    );
}

fn parse_task(doc: &Document<'_>, node: Node<'_, '_>) -> Result<TaskSpec> {
    let mut task_id = None;
    let mut processing_time = None;
    let mut memory = 0.0;
    let mut cpu_power = 0.0;
    let mut deadline = None;
    let mut dependencies = Vec::new();

    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "taskId" => task_id = Some(nonempty_text(doc, child)?),
            "processingTime" => processing_time = Some(seconds(doc, child)?),
            "requirements" => {
                for req in child.children().filter(Node::is_element) {
                    match req.tag_name().name() {
                        "memory" => memory = amount(doc, req)?,
                        "cpuPower" => cpu_power = amount(doc, req)?,
                        "deadlineTime" => deadline = Some(seconds(doc, req)?),
                        _ => warn_unknown(doc, req),
                    }
                }
            }
            "depends" => dependencies.push(parse_depends(doc, child)?),
            _ => warn_unknown(doc, child),
        }
    }

    let task_id = task_id.ok_or_else(|| invalid(doc, node, "missing <taskId>"))?;
    let processing_time =
        processing_time.ok_or_else(|| invalid(doc, node, format!("task `{task_id}` is missing <processingTime>")))?;
    if dependencies.iter().any(|d: &Dependency| d.task_id == task_id) {
        return Err(invalid(doc, node, format!("task `{task_id}` depends on itself")));
    }
    Ok(TaskSpec {
        task_id,
        processing_time,
        memory,
        cpu_power,
        deadline,
        dependencies,
    })
}

fn parse_depends(doc: &Document<'_>, node: Node<'_, '_>) -> Result<Dependency> {
    let mut task_id = None;
    let mut comm_time = None;
    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "taskId" => task_id = Some(nonempty_text(doc, child)?),
            "commTime" => comm_time = Some(seconds(doc, child)?),
            _ => warn_unknown(doc, child),
        }
    }
    Ok(Dependency {
        task_id: task_id.ok_or_else(|| invalid(doc, node, "missing <taskId>"))?,
        comm_time: comm_time.ok_or_else(|| invalid(doc, node, "missing <commTime>"))?,
    })
}

fn parse_node(doc: &Document<'_>, node: Node<'_, '_>) -> Result<ResourceSpec> {
    let mut id = None;
    let mut farm_name = String::new();
    let mut cluster_name = String::new();
    let mut node_name = String::new();
    let mut cpu_power = None;
    let mut memory = None;
    let mut cpu_idle = 0.0;

    for child in node.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "Id" => id = Some(nonempty_text(doc, child)?),
            "FarmName" => farm_name = text_of(child).to_string(),
            "ClusterName" => cluster_name = text_of(child).to_string(),
            "nodeName" => node_name = text_of(child).to_string(),
            "Parameters" => {
                for param in child.children().filter(Node::is_element) {
                    match param.tag_name().name() {
                        "CPUPower" => cpu_power = Some(amount(doc, param)?),
                        "Memory" => memory = Some(amount(doc, param)?),
                        "CPU_idle" => cpu_idle = amount(doc, param)?,
                        _ => warn_unknown(doc, param),
                    }
                }
            }
            _ => warn_unknown(doc, child),
        }
    }

    let id = id.ok_or_else(|| invalid(doc, node, "missing <Id>"))?;
    Ok(ResourceSpec {
        cpu_power: cpu_power.ok_or_else(|| invalid(doc, node, format!("node `{id}` is missing <CPUPower>")))?,
        memory: memory.ok_or_else(|| invalid(doc, node, format!("node `{id}` is missing <Memory>")))?,
        id,
        node_name,
        cluster_name,
        farm_name,
        cpu_idle,
    })
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn write_task_file(tasks: &TaskSet) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<tasks>\n");
    for task in tasks {
        out.push_str("  <task>\n");
        let _ = writeln!(out, "    <taskId>{}</taskId>", escape(&task.task_id));
        out.push_str("    <requirements>\n");
        let _ = writeln!(out, "      <memory>{}</memory>", task.memory);
        let _ = writeln!(out, "      <cpuPower>{}</cpuPower>", task.cpu_power);
        if let Some(deadline) = task.deadline {
            let _ = writeln!(out, "      <deadlineTime>{deadline}</deadlineTime>");
        }
        out.push_str("    </requirements>\n");
        let _ = writeln!(out, "    <processingTime>{}</processingTime>", task.processing_time);
        for dep in &task.dependencies {
            out.push_str("    <depends>\n");
            let _ = writeln!(out, "      <taskId>{}</taskId>", escape(&dep.task_id));
            let _ = writeln!(out, "      <commTime>{}</commTime>", dep.comm_time);
            out.push_str("    </depends>\n");
        }
        out.push_str("  </task>\n");
    }
    out.push_str("</tasks>\n");
    out
}

pub fn write_resource_file(resources: &ResourceSet) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<Nodes>\n");
    for r in resources {
        out.push_str("  <Node>\n");
        let _ = writeln!(out, "    <Id>{}</Id>", escape(&r.id));
        let _ = writeln!(out, "    <FarmName>{}</FarmName>", escape(&r.farm_name));
        let _ = writeln!(out, "    <ClusterName>{}</ClusterName>", escape(&r.cluster_name));
        let _ = writeln!(out, "    <nodeName>{}</nodeName>", escape(&r.node_name));
        out.push_str("    <Parameters>\n");
        let _ = writeln!(out, "      <CPUPower>{}</CPUPower>", r.cpu_power);
        let _ = writeln!(out, "      <Memory>{}</Memory>", r.memory);
        let _ = writeln!(out, "      <CPU_idle>{}</CPU_idle>", r.cpu_idle);
        out.push_str("    </Parameters>\n");
        out.push_str("  </Node>\n");
    }
    out.push_str("</Nodes>\n");
    out
}
