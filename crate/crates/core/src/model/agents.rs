//! Agent map files: one agent per line, `agentId: resourceId, resourceId ...`.
//! Blank lines and `#` comments are skipped.

use super::{AgentMap, AgentSpec};
use crate::error::{Error, Result};

pub fn parse_agent_map(text: &str) -> Result<AgentMap> {
    let mut agents = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (agent, rest) = line
            .split_once(':')
            .or_else(|| line.split_once('='))
            .ok_or_else(|| Error::AgentMap {
                line: i + 1,
                message: format!("expected `agentId: resourceId, ...`, got `{line}`"),
            })?;
        let agent_id = agent.trim().to_string();
        let resources: Vec<String> = rest
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        agents.push(AgentSpec { agent_id, resources });
    }
    AgentMap::new(agents)
}

pub fn write_agent_map(map: &AgentMap) -> String {
    map.agents()
        .iter()
        .map(|a| format!("{}: {}\n", a.agent_id, a.resources.join(", ")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_comments() {
        let map =
            parse_agent_map("# test bed\nagent1: P01, P02\n\nagent2 = P03 P04 # two stations\nagent3:P05\n").unwrap();
        assert_eq!(map.len(), 3);
        assert_eq!(map.agents()[1].resources, vec!["P03", "P04"]);
        assert_eq!(parse_agent_map(&write_agent_map(&map)).unwrap(), map);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(
            parse_agent_map("agent1 P01"),
            Err(Error::AgentMap { line: 1, .. })
        ));
        assert!(parse_agent_map("a:\n").is_err());
        assert!(parse_agent_map("a: P1\nb: P1\n").is_err());
    }
}
