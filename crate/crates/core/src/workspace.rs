//! Workspaces: one signature plus named structures, theories, classes,
//! pools, and spans, loaded from the DSL.

use std::collections::BTreeMap;

use crate::amalgam::Span;
use crate::error::{Error, Result};
use crate::formula::Theory;
use crate::model_class::{ModelClass, DEFAULT_ENUM_CAP};
use crate::parse::{parse_workspace_items, ClassExpr, PoolExpr, SpanDecl, WorkspaceItem};
use crate::pool::{PoolSpec, DEFAULT_POOL_CAP};
use crate::signature::Signature;
use crate::structure::Structure;

#[derive(Debug, Clone)]
pub struct Workspace {
    pub signature: Signature,
    pub structures: BTreeMap<String, Structure>,
    pub theories: BTreeMap<String, Theory>,
    pub classes: BTreeMap<String, ModelClass>,
    pub pools: BTreeMap<String, PoolSpec>,
    pub spans: BTreeMap<String, SpanDecl>,
}

impl Workspace {
    pub fn parse(text: &str) -> Result<Workspace> {
        let items = parse_workspace_items(text)?;
        let mut signature: Option<Signature> = None;
        let mut structures = BTreeMap::new();
        let mut theories = BTreeMap::new();
        let mut class_exprs: Vec<(String, ClassExpr)> = Vec::new();
        let mut pool_exprs: Vec<(String, PoolExpr)> = Vec::new();
        let mut spans = BTreeMap::new();
        for item in items {
            match item {
                WorkspaceItem::Signature(sig) => {
                    if signature.is_some() {
                        return Err(Error::Workspace(
                            "a workspace has exactly one signature".into(),
                        ));
                    }
                    signature = Some(sig);
                }
                WorkspaceItem::Structure(name, structure) => {
                    structure.require_total()?;
                    if structures.insert(name.clone(), structure).is_some() {
                        return Err(Error::Workspace(format!("duplicate structure `{name}`")));
                    }
                }
                WorkspaceItem::Theory(theory) => {
                    if theories.insert(theory.name.clone(), theory.clone()).is_some() {
                        return Err(Error::Workspace(format!(
                            "duplicate theory `{}`",
                            theory.name
                        )));
                    }
                }
                WorkspaceItem::Class { name, expr } => class_exprs.push((name, expr)),
                WorkspaceItem::Pool { name, expr } => pool_exprs.push((name, expr)),
                WorkspaceItem::Span(decl) => {
                    if spans.insert(decl.name.clone(), decl.clone()).is_some() {
                        return Err(Error::Workspace(format!("duplicate span `{}`", decl.name)));
                    }
                }
            }
        }
        let signature =
            signature.ok_or_else(|| Error::Workspace("workspace has no signature".into()))?;
        let mut ws = Workspace {
            signature,
            structures,
            theories,
            classes: BTreeMap::new(),
            pools: BTreeMap::new(),
            spans,
        };
        for (name, expr) in class_exprs {
            let class = ws.resolve_class(&expr)?;
            ws.classes.insert(name, class);
        }
        for (name, expr) in pool_exprs {
            let spec = ws.pool_spec(&expr);
            ws.pools.insert(name, spec);
        }
        // spans must resolve
        for decl in ws.spans.clone().values() {
            ws.span(&decl.name)?;
        }
        Ok(ws)
    }

    pub fn structure(&self, name: &str) -> Result<&Structure> {
        self.structures
            .get(name)
            .ok_or_else(|| Error::Workspace(format!("unknown structure `{name}`")))
    }

    pub fn theory(&self, name: &str) -> Result<Theory> {
        if name == "empty" || name == "T_empty" {
            if let Some(t) = self.theories.get(name) {
                return Ok(t.clone());
            }
            return Ok(Theory::empty("empty"));
        }
        self.theories
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Workspace(format!("unknown theory `{name}`")))
    }

    /// Materialize a class expression against this workspace.
    pub fn resolve_class(&self, expr: &ClassExpr) -> Result<ModelClass> {
        match expr {
            ClassExpr::Models {
                theory,
                sig_items,
                max_size,
                dedup,
            } => {
                let theory = self.theory(theory)?;
                if !sig_items.is_empty() {
                    let built = signature_from_items(sig_items)?;
                    if !built.compatible_with(&self.signature) {
                        return Err(Error::SignatureMismatch(
                            "class expression signature differs from the workspace signature"
                                .into(),
                        ));
                    }
                }
                ModelClass::generate(
                    &theory,
                    &self.signature,
                    *max_size,
                    *dedup,
                    DEFAULT_ENUM_CAP,
                )
            }
            ClassExpr::Explicit(names) => {
                let members = names
                    .iter()
                    .map(|n| self.structure(n).cloned())
                    .collect::<Result<Vec<_>>>()?;
                ModelClass::explicit(format!("explicit({})", names.join(",")), members)
            }
        }
    }

    pub fn pool_spec(&self, expr: &PoolExpr) -> PoolSpec {
        PoolSpec {
            signature: self.signature.clone(),
            max_vars: expr.vars,
            max_atoms: expr.atoms,
            max_depth: if expr.quantifier_free { 0 } else { expr.depth },
            max_term_depth: expr.term_depth,
            params: expr.params,
            cap: DEFAULT_POOL_CAP,
        }
    }

    pub fn span(&self, name: &str) -> Result<Span> {
        let decl = self
            .spans
            .get(name)
            .ok_or_else(|| Error::Workspace(format!("unknown span `{name}`")))?;
        let apex = self.structure(&decl.apex)?.clone();
        let left = self.structure(&decl.left_target)?.clone();
        let right = self.structure(&decl.right_target)?.clone();
        if decl.left_map.len() != apex.size() || decl.right_map.len() != apex.size() {
            return Err(Error::Workspace(format!(
                "span `{name}` has leg maps of the wrong length"
            )));
        }
        Ok(Span::new(
            apex,
            left,
            decl.left_map.clone(),
            right,
            decl.right_map.clone(),
        ))
    }
}

/// Build a signature from `sym/arity` items of a class expression (bare
/// items are relations).
pub fn signature_from_items(
    items: &[(crate::parse::SigItemKind, String, usize)],
) -> Result<Signature> {
    let mut sig = Signature::new("adhoc");
    for (kind, symbol, arity) in items {
        match kind {
            crate::parse::SigItemKind::Rel => sig.add_relation(symbol.clone(), *arity)?,
            crate::parse::SigItemKind::Fun => sig.add_function(symbol.clone(), *arity)?,
        }
    }
    Ok(sig)
}
