use std::fmt::Write;

use crate::model::{Component, Link, LinkRef, SystemModel};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn join(ids: &[String]) -> String {
    ids.join(", ")
}

fn join_refs(refs: &[LinkRef]) -> String {
    refs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
}

pub(super) fn write(model: &SystemModel) -> String {
    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = write_model(&mut out, model);
    out
}

fn write_model(out: &mut String, m: &SystemModel) -> std::fmt::Result {
    writeln!(out, "system {}", quote(&m.name))?;
    writeln!(out, "top_event {}", quote(&m.top_event))?;

    if !m.losses.is_empty() {
        writeln!(out)?;
        for l in &m.losses {
            writeln!(out, "loss {} {}", l.id, quote(&l.description))?;
        }
    }
    if !m.hazards.is_empty() {
        writeln!(out)?;
        for h in &m.hazards {
            write!(out, "hazard {} {}", h.id, quote(&h.description))?;
            if !h.linked_losses.is_empty() {
                write!(out, " losses: {}", join(&h.linked_losses))?;
            }
            writeln!(out)?;
        }
    }
    if !m.design_classes.is_empty() {
        writeln!(out)?;
        for c in &m.design_classes {
            writeln!(out, "design_class {} {} diversity: {}", c.id, quote(&c.description), quote(&c.diversity_tag))?;
        }
    }
    for d in &m.divisions {
        writeln!(out)?;
        if let Some(src) = &d.replicates {
            writeln!(out, "division {} replicates {}", d.id, src)?;
            continue;
        }
        writeln!(out, "division {} {{", d.id)?;
        for c in &d.components {
            write_component(out, c)?;
        }
        writeln!(out, "}}")?;
    }
    if !m.redundancy_groups.is_empty() {
        writeln!(out)?;
        for g in &m.redundancy_groups {
            write!(out, "redundancy_group {} level: {} logic: {}", g.id, g.level, g.logic)?;
            if !g.members.is_empty() {
                write!(out, " members: {}", join(&g.members))?;
            }
            writeln!(out)?;
        }
    }
    if !m.shared_resources.is_empty() {
        writeln!(out)?;
        for r in &m.shared_resources {
            write!(out, "shared_resource {} scope: {}", r.id, r.scope)?;
            if !r.dependents.is_empty() {
                write!(out, " dependents: {}", join(&r.dependents))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

fn write_component(out: &mut String, c: &Component) -> std::fmt::Result {
    write!(out, "  component {} kind: {} tech: {} class: {}", c.id, c.kind, c.tech, c.design_class)?;
    if c.stub {
        write!(out, " stub: true")?;
    }
    if c.inputs.is_empty() && c.feedback_inputs.is_empty() && c.links.is_empty() {
        return writeln!(out);
    }
    writeln!(out, " {{")?;
    if !c.inputs.is_empty() {
        writeln!(out, "    inputs: {}", join_refs(&c.inputs))?;
    }
    if !c.feedback_inputs.is_empty() {
        writeln!(out, "    feedback: {}", join_refs(&c.feedback_inputs))?;
    }
    for l in &c.links {
        write_link(out, l)?;
    }
    writeln!(out, "  }}")
}

fn write_link(out: &mut String, l: &Link) -> std::fmt::Result {
    write!(out, "    {} {} port: {}", l.kind, l.id, l.port)?;
    if !l.targets.is_empty() {
        write!(out, " -> {}", join(&l.targets))?;
    }
    if l.applicability.is_empty() {
        return writeln!(out);
    }
    writeln!(out, " {{")?;
    for (ty, hazards) in &l.applicability {
        write!(out, "      applicable: {ty}")?;
        if !hazards.is_empty() {
            write!(out, " hazards: {}", join(hazards))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "    }}")
}
