//! Name resolution across the loaded workspace and the bundled ones.

use posmod_core::error::{Error, Result};
use posmod_core::formula::Theory;
use posmod_core::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use posmod_core::parse::{parse_class_expr, parse_pool_expr, ClassExpr, PoolExpr};
use posmod_core::pool::{PoolSpec, DEFAULT_POOL_CAP};
use posmod_core::signature::Signature;
use posmod_core::structure::Structure;
use posmod_core::workspace::{signature_from_items, Workspace};

pub const DIGRAPH_WORKSPACE: &str = include_str!("../assets/digraph.pm");
pub const UNARY_WORKSPACE: &str = include_str!("../assets/unary.pm");
pub const POSET_WORKSPACE: &str = include_str!("../assets/poset.pm");

/// The user workspace (when given) followed by the bundled ones; lookups
/// scan in that order.
pub struct Context {
    pub workspaces: Vec<Workspace>,
}

impl Context {
    pub fn bundled() -> Result<Self> {
        Ok(Context {
            workspaces: vec![
                Workspace::parse(DIGRAPH_WORKSPACE)?,
                Workspace::parse(UNARY_WORKSPACE)?,
                Workspace::parse(POSET_WORKSPACE)?,
            ],
        })
    }

    pub fn with_user_workspace(text: &str) -> Result<Self> {
        let mut ctx = Context::bundled()?;
        ctx.workspaces.insert(0, Workspace::parse(text)?);
        Ok(ctx)
    }

    pub fn find_structure(&self, name: &str) -> Result<(&Workspace, &Structure)> {
        for ws in &self.workspaces {
            if let Some(s) = ws.structures.get(name) {
                return Ok((ws, s));
            }
        }
        Err(Error::Workspace(format!("unknown structure `{name}`")))
    }

    pub fn find_theory(&self, name: &str) -> Result<(&Workspace, Theory)> {
        for ws in &self.workspaces {
            if let Some(t) = ws.theories.get(name) {
                return Ok((ws, t.clone()));
            }
        }
        Err(Error::Workspace(format!("unknown theory `{name}`")))
    }

    pub fn find_class(&self, name: &str) -> Option<&ModelClass> {
        self.workspaces.iter().find_map(|ws| ws.classes.get(name))
    }

    /// Resolve a class expression or a named workspace class.
    pub fn resolve_class(&self, text: &str) -> Result<ModelClass> {
        if let Some(class) = self.find_class(text) {
            return Ok(class.clone());
        }
        let expr = parse_class_expr(text)?;
        match &expr {
            ClassExpr::Models {
                theory,
                sig_items,
                max_size,
                dedup,
            } => {
                if theory == "empty" && !sig_items.is_empty() {
                    let sig = signature_from_items(sig_items)?;
                    return ModelClass::generate(
                        &Theory::empty("empty"),
                        &sig,
                        *max_size,
                        *dedup,
                        DEFAULT_ENUM_CAP,
                    );
                }
                if theory == "empty" {
                    let ws = self
                        .workspaces
                        .first()
                        .ok_or_else(|| Error::Workspace("no workspace loaded".into()))?;
                    return ws.resolve_class(&expr);
                }
                let (ws, t) = self.find_theory(theory)?;
                if !sig_items.is_empty() {
                    let built = signature_from_items(sig_items)?;
                    if !built.compatible_with(&ws.signature) {
                        return Err(Error::SignatureMismatch(format!(
                            "theory `{theory}` lives over a different signature"
                        )));
                    }
                }
                ModelClass::generate(&t, &ws.signature, *max_size, *dedup, DEFAULT_ENUM_CAP)
            }
            ClassExpr::Explicit(names) => {
                let members = names
                    .iter()
                    .map(|n| self.find_structure(n).map(|(_, s)| s.clone()))
                    .collect::<Result<Vec<_>>>()?;
                ModelClass::explicit(format!("explicit({})", names.join(",")), members)
            }
        }
    }

    /// Resolve a pool expression (or named pool) against a signature.
    pub fn resolve_pool_spec(&self, text: &str, sig: &Signature) -> Result<PoolSpec> {
        for ws in &self.workspaces {
            if let Some(spec) = ws.pools.get(text) {
                if spec.signature.compatible_with(sig) {
                    return Ok(spec.clone());
                }
            }
        }
        let expr: PoolExpr = parse_pool_expr(text)?;
        Ok(PoolSpec {
            signature: sig.clone(),
            max_vars: expr.vars,
            max_atoms: expr.atoms,
            max_depth: if expr.quantifier_free { 0 } else { expr.depth },
            max_term_depth: expr.term_depth,
            params: expr.params,
            cap: DEFAULT_POOL_CAP,
        })
    }

    /// Resolve a class expression into an amalgam budget. Generated classes
    /// stay lazy so the search can stop at small strata instead of
    /// materializing the whole bound up front.
    pub fn resolve_budget(&self, text: &str) -> Result<posmod_core::amalgam::AmalgamBudget> {
        use posmod_core::amalgam::AmalgamBudget;
        if let Some(class) = self.find_class(text) {
            return Ok(AmalgamBudget::Explicit(class.clone()));
        }
        let expr = parse_class_expr(text)?;
        match &expr {
            ClassExpr::Models {
                theory,
                sig_items,
                max_size,
                ..
            } => {
                let (theory, sig) = if theory == "empty" && !sig_items.is_empty() {
                    (Theory::empty("empty"), signature_from_items(sig_items)?)
                } else if theory == "empty" {
                    let ws = self
                        .workspaces
                        .first()
                        .ok_or_else(|| Error::Workspace("no workspace loaded".into()))?;
                    (Theory::empty("empty"), ws.signature.clone())
                } else {
                    let (ws, t) = self.find_theory(theory)?;
                    (t, ws.signature.clone())
                };
                Ok(AmalgamBudget::generated(theory, sig, *max_size))
            }
            ClassExpr::Explicit(_) => Ok(AmalgamBudget::Explicit(self.resolve_class(text)?)),
        }
    }

    pub fn find_span(&self, name: &str) -> Result<posmod_core::amalgam::Span> {
        for ws in &self.workspaces {
            if ws.spans.contains_key(name) {
                return ws.span(name);
            }
        }
        Err(Error::Workspace(format!("unknown span `{name}`")))
    }
}
