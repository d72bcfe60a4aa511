use std::collections::BTreeMap;

use num_traits::Zero;

use super::{bridge_gaps, is_inertial, InertiaError, InertialCertificate};
use crate::endokit::{classify, crt_coprime, is_finitary, Endo};
use crate::exactnum::{rat_int, Int, JElement, Prime, Rational};
use crate::groupkit::{h_descriptor, invariants, BlockKind, HElement};

/// `φ = sm + ui + nm`, together with `φ1 = φ − sm` and `φ2 = φ1 − nm = ui`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub sm: Endo,
    pub ui: Endo,
    pub nm: Endo,
    pub phi1: Endo,
    pub phi2: Endo,
}

/// Outcome of the predicates that a decomposition must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompositionChecks {
    pub sum_exact: bool,
    pub sm_semi: bool,
    pub nm_mini: bool,
    pub ui_uniform: bool,
}

impl DecompositionChecks {
    pub fn all(&self) -> bool {
        self.sum_exact && self.sm_semi && self.nm_mini && self.ui_uniform
    }
}

impl Decomposition {
    pub fn checks(&self, phi: &Endo) -> DecompositionChecks {
        let sum = self.sm.add(&self.ui).and_then(|s| s.add(&self.nm));
        let sm = classify(&self.sm);
        let nm = classify(&self.nm);
        DecompositionChecks {
            sum_exact: sum.as_ref() == Ok(phi),
            sm_semi: sm.semi.is_some() || sm.multiplication.is_some(),
            nm_mini: nm.mini.is_some() || self.nm == Endo::zero(phi.group().clone()),
            ui_uniform: is_uniform(&self.ui),
        }
    }
}

/// `0` on the cyclic `pi`-blocks, `r` everywhere else.
fn semi_part(phi: &Endo, cert: &InertialCertificate) -> Result<Endo, InertiaError> {
    let g = phi.group().clone();
    Ok(match &cert.r {
        None => Endo::zero(g),
        Some(r) => Endo::blockwise(g, |_, k| match k {
            BlockKind::Cyclic { p, .. } if cert.pi.contains(p) => Rational::zero(),
            _ => r.clone(),
        })?,
    })
}

/// Canonical decomposition of an inertial endomorphism.
pub fn decompose(phi: &Endo, cert: &InertialCertificate) -> Result<Decomposition, InertiaError> {
    if is_inertial(phi).certificate() != Some(cert) {
        return Err(InertiaError::CertificateMismatch);
    }
    let g = phi.group().clone();
    let sm = semi_part(phi, cert)?;
    let phi1 = phi.sub(&sm)?;
    let gaps = bridge_gaps(cert, &invariants(&g));
    let nm = if gaps.is_empty() {
        Endo::zero(g.clone())
    } else {
        let inv = invariants(&g);
        let parts: Vec<(Int, Int)> = gaps.iter().map(|(p, s)| (s.clone(), p.pow(inv.at(*p).c))).collect();
        Endo::mini(g.clone(), &crt_coprime(&parts), &gaps.keys().copied().collect())
    };
    let phi2 = phi1.sub(&nm)?;
    Ok(Decomposition { sm, ui: phi2.clone(), nm, phi1, phi2 })
}

/// The per-prime scalars `β_p` of a uniform endomorphism, zero entries
/// omitted.
pub fn uniform_witness(phi: &Endo) -> Option<BTreeMap<Prime, Rational>> {
    let verdict = is_inertial(phi);
    let cert = verdict.certificate()?;
    let g = phi.group();
    if phi.tf().iter().flatten().any(|x| !x.is_zero()) {
        return None;
    }
    if let Some(f) = g.free_omega() {
        if !phi.block_scalar(f).is_some_and(|s| s.is_zero()) {
            return None;
        }
    }
    let inv = invariants(g);
    let mut out = BTreeMap::new();
    for (p, pc) in &cert.per_prime {
        let beta = if inv.at(*p).s_rank > 0 {
            Rational::zero()
        } else if let Some(a) = &pc.alpha_div {
            a.clone()
        } else if let Some(c) = &pc.alpha_cyc {
            rat_int(c.value())
        } else {
            Rational::zero()
        };
        if let Some(a) = &pc.alpha_div {
            if *a != beta {
                return None;
            }
        }
        if let Some(c) = &pc.alpha_cyc {
            let v = crate::exactnum::residue_mod(&beta, &c.modulus())?;
            if v != *c.value() {
                return None;
            }
        }
        if !beta.is_zero() {
            out.insert(*p, beta);
        }
    }
    Some(out)
}

pub fn is_uniform(phi: &Endo) -> bool {
    uniform_witness(phi).is_some()
}

/// Class of a uniform endomorphism in the ring described by the
/// H-descriptor of its group.
pub fn ui_class_in_h(phi: &Endo) -> Result<HElement, InertiaError> {
    let beta = uniform_witness(phi).ok_or(InertiaError::NotUniform)?;
    let desc = h_descriptor(phi.group())?;
    let value = JElement::new(Int::zero(), beta).expect("scalars are p-local");
    Ok(HElement { value, desc })
}

/// Splits a bounded inertial endomorphism as a mini-multiplication plus a
/// finitary endomorphism.
pub fn bounded_split(phi: &Endo) -> Option<(Endo, Endo)> {
    let verdict = is_inertial(phi);
    let cert = verdict.certificate()?;
    let g = phi.group().clone();
    if phi.tf().iter().flatten().any(|x| !x.is_zero()) || !phi.tau().is_empty() {
        return None;
    }
    for (i, b) in g.blocks().iter().enumerate() {
        if matches!(b.kind, BlockKind::Prufer { .. } | BlockKind::FreeOmega)
            && !phi.action(i).is_some_and(|a| a.is_zero())
        {
            return None;
        }
    }
    let inv = invariants(&g);
    let parts: BTreeMap<Prime, Int> = cert
        .per_prime
        .iter()
        .filter_map(|(p, pc)| pc.alpha_cyc.as_ref().filter(|c| !c.value().is_zero()).map(|c| (*p, c.value().clone())))
        .collect();
    let nm = if parts.is_empty() {
        Endo::zero(g.clone())
    } else {
        let moduli: Vec<(Int, Int)> = parts.iter().map(|(p, s)| (s.clone(), p.pow(inv.at(*p).c))).collect();
        Endo::mini(g.clone(), &crt_coprime(&moduli), &parts.keys().copied().collect())
    };
    let fin = phi.sub(&nm).ok()?;
    debug_assert!(is_finitary(&fin));
    Some((nm, fin))
}
