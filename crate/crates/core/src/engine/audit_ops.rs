use super::{require, Effect, Engine};
use crate::access::Action;
use crate::audit::{self, AuditFilter, AuditRecord, ChainVerdict};
use crate::clock::format_millis;
use crate::error::Result;
use crate::model::PrincipalId;

fn describe(f: &AuditFilter) -> String {
    let mut parts = Vec::new();
    if let Some(a) = &f.actor {
        parts.push(format!("actor={a}"));
    }
    if let Some(a) = f.action {
        parts.push(format!("action={a}"));
    }
    if let Some(o) = f.outcome {
        parts.push(format!("outcome={}", o.name()));
    }
    if let Some(t) = &f.from {
        parts.push(format!("from={}", format_millis(t)));
    }
    if let Some(t) = &f.to {
        parts.push(format!("to={}", format_millis(t)));
    }
    if let Some(p) = &f.target_prefix {
        parts.push(format!("target_prefix={p}"));
    }
    if parts.is_empty() {
        "all".into()
    } else {
        parts.join(" ")
    }
}

impl Engine {
    /// Matching records in seq order. The query itself is then recorded
    /// as a usage record, which is not part of its own result.
    pub fn query_audit(&mut self, actor: &PrincipalId, filter: &AuditFilter) -> Result<Vec<AuditRecord>> {
        self.run(actor, Action::ReadAuditLog, "audit", |s, _| {
            require(s, actor, Action::ReadAuditLog, None, "audit")?;
            let hits: Vec<AuditRecord> = s.audit.iter().filter(|r| filter.matches(r)).cloned().collect();
            let detail = format!("query {} matched={}", describe(filter), hits.len());
            Ok(Effect::new(hits, vec![], detail))
        })
    }

    /// Newline-delimited export of the whole chain for offline checking.
    pub fn export_audit(&mut self, actor: &PrincipalId) -> Result<String> {
        self.run(actor, Action::ReadAuditLog, "audit/export", |s, _| {
            require(s, actor, Action::ReadAuditLog, None, "audit/export")?;
            let mut out = String::new();
            for r in &s.audit {
                out.push_str(&r.export_line());
                out.push('\n');
            }
            let detail = format!("export records={}", s.audit.len());
            Ok(Effect::new(out, vec![], detail))
        })
    }

    /// Recomputes the chain. Not recorded on success.
    pub fn verify_chain_as(&self, actor: &PrincipalId) -> Result<ChainVerdict> {
        require(&self.state, actor, Action::ReadAuditLog, None, "audit/verify")?;
        Ok(audit::verify_chain(&self.state.audit))
    }
}
