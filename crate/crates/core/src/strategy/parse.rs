//! Parser for screening-strategy expressions such as `AI·M+M2`.
//!
//! Grammar:
//!
//! ```text
//! expr    := stage ( '+' stage )*
//! stage   := member ( SEP member )?          SEP is '·' or '.'
//! member  := IDENT [ '[Se]' ]
//! ```
//!
//! Stages are read left to right. A two-member stage is a consensus and
//! consumes the following single-grader stage as its adjudicator. The
//! remaining stages fold left into sequential reviews. `[Se]` marks the
//! threshold-filtered AI: either written on the AI itself (`AI[Se]+M`) or,
//! in the conventional spelling, on the reviewer directly after an AI stage
//! (`AI+M[Se]`).

use super::{GraderKind, GraderRegistry, StrategyError, StrategyTree};

/// Upper bound on nesting depth of a parsed strategy.
pub const MAX_DEPTH: usize = 8;

const FILTER_SUFFIX: &str = "[Se]";

#[derive(Debug, Clone)]
struct Member {
    id: String,
    filtered: bool,
    /// Original text, for error messages.
    token: String,
}

fn parse_member(text: &str) -> Result<Member, StrategyError> {
    let token = text.to_string();
    let (id, filtered) = match text.strip_suffix(FILTER_SUFFIX) {
        Some(rest) => (rest, true),
        None => (text, false),
    };
    if id.is_empty() {
        return Err(StrategyError::parse(&token, "missing grader id"));
    }
    if let Some(bad) = id.chars().find(|c| !(c.is_ascii_alphanumeric() || *c == '_')) {
        return Err(StrategyError::parse(&token, format!("unexpected character '{bad}'")));
    }
    Ok(Member {
        id: id.to_string(),
        filtered,
        token,
    })
}

fn split_stage(stage: &str) -> Result<Vec<Member>, StrategyError> {
    let members: Vec<&str> = stage.split(['·', '.']).collect();
    if members.iter().any(|m| m.is_empty()) {
        return Err(StrategyError::parse(stage, "empty grader in parallel stage"));
    }
    if members.len() > 2 {
        return Err(StrategyError::parse(
            stage,
            "a parallel stage holds exactly two graders",
        ));
    }
    members.into_iter().map(parse_member).collect()
}

fn member_node(member: &Member, registry: &GraderRegistry) -> Result<StrategyTree, StrategyError> {
    let profile = registry
        .get(&member.id)
        .ok_or_else(|| StrategyError::parse(&member.token, format!("unknown grader id '{}'", member.id)))?;
    if !member.filtered {
        return Ok(StrategyTree::Leaf(member.id.clone()));
    }
    if profile.kind != GraderKind::Ai {
        return Err(StrategyError::parse(&member.token, "[Se] applies to an AI grader"));
    }
    filtered_node(&member.id, &member.token, registry)
}

fn filtered_node(id: &str, token: &str, registry: &GraderRegistry) -> Result<StrategyTree, StrategyError> {
    let profile = registry
        .get(id)
        .ok_or_else(|| StrategyError::parse(token, format!("unknown grader id '{id}'")))?;
    let filter = profile
        .filter
        .ok_or_else(|| StrategyError::parse(token, format!("grader '{id}' has no threshold filter parameters")))?;
    Ok(StrategyTree::Filtered {
        grader: id.to_string(),
        filter,
    })
}

/// Parses a strategy expression against a grader registry.
pub fn parse_strategy(expr: &str, registry: &GraderRegistry) -> Result<StrategyTree, StrategyError> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(StrategyError::parse(expr, "empty expression"));
    }
    let stages = compact
        .split('+')
        .map(|s| {
            if s.is_empty() {
                Err(StrategyError::parse(expr, "empty stage"))
            } else {
                split_stage(s).map(|m| (s.to_string(), m))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut folded: Option<StrategyTree> = None;
    let mut i = 0;
    while i < stages.len() {
        let (text, members) = &stages[i];
        let node = if members.len() == 2 {
            let (_, adjudicator) = stages
                .get(i + 1)
                .ok_or_else(|| StrategyError::parse(text, "parallel stage needs a following adjudicator stage"))?;
            if adjudicator.len() != 1 {
                return Err(StrategyError::parse(
                    &stages[i + 1].0,
                    "adjudicator stage must be a single grader",
                ));
            }
            if let Some(m) = members.iter().chain(adjudicator).find(|m| m.filtered) {
                if registry.get(&m.id).map(|p| p.kind) != Some(GraderKind::Ai) {
                    return Err(StrategyError::parse(&m.token, "[Se] is not allowed inside a consensus"));
                }
            }
            i += 2;
            StrategyTree::consensus(
                member_node(&members[0], registry)?,
                member_node(&members[1], registry)?,
                member_node(&adjudicator[0], registry)?,
            )
        } else {
            i += 1;
            let member = &members[0];
            let is_ai = registry.get(&member.id).map(|p| p.kind) == Some(GraderKind::Ai);
            if member.filtered && !is_ai {
                // `AI+M[Se]`: the suffix on the reviewer marks the AI stage
                // immediately before it as filtered.
                match folded.take() {
                    Some(StrategyTree::Leaf(ai)) if registry.get(&ai).map(|p| p.kind) == Some(GraderKind::Ai) => {
                        folded = Some(filtered_node(&ai, &member.token, registry)?);
                    }
                    _ => {
                        return Err(StrategyError::parse(
                            &member.token,
                            "[Se] on a human grader must directly follow an AI stage",
                        ))
                    }
                }
                let plain = Member {
                    filtered: false,
                    ..member.clone()
                };
                member_node(&plain, registry)?
            } else {
                member_node(member, registry)?
            }
        };
        folded = Some(match folded {
            None => node,
            Some(upstream) => StrategyTree::sequential(upstream, node),
        });
    }

    let tree = folded.ok_or_else(|| StrategyError::parse(expr, "empty expression"))?;
    if tree.depth() > MAX_DEPTH {
        return Err(StrategyError::parse(
            expr,
            format!("depth {} exceeds the limit of {MAX_DEPTH}", tree.depth()),
        ));
    }
    Ok(tree)
}

/// Canonical spelling of an expression: whitespace removed and `.` written as `·`.
pub fn canonical_form(expr: &str) -> String {
    expr.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '.' { '·' } else { c })
        .collect()
}
