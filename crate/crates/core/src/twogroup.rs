//! Automorphism 2-groups of small finite categories, the interchange law,
//! and the commutativity forced on decorations by Eckmann-Hilton.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contexts::ContextCategory;
use crate::error::{Error, Result};
use crate::interp::Status;

pub const DEFAULT_OBJECT_LIMIT: usize = 8;
pub const MAX_MORPHISMS: usize = 64;
pub const EXHAUSTIVE_TWO_CELLS: usize = 64;
pub const MAX_GROUP_ORDER: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hom {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

/// A finite category given by its composition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    homs: Vec<Hom>,
    identities: Vec<usize>,
    /// `compose[g][f] = g ∘ f` where defined.
    compose: Vec<Vec<Option<usize>>>,
}

/// JSON form: identities are implicit and need not be listed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub objects: Vec<String>,
    pub homs: Vec<HomSpec>,
    /// Triples `[g, f, g∘f]` for every composable pair of non-identity homs.
    pub composition: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSpec {
    pub name: String,
    pub src: String,
    pub dst: String,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidCategory(msg.into())
}

impl FiniteCategory {
    fn with_identities(objects: Vec<String>) -> (Vec<Hom>, Vec<usize>) {
        let homs: Vec<Hom> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| Hom {
                name: format!("id_{o}"),
                src: i,
                dst: i,
            })
            .collect();
        let ids = (0..objects.len()).collect();
        (homs, ids)
    }

    fn finish(
        objects: Vec<String>,
        homs: Vec<Hom>,
        identities: Vec<usize>,
        mut compose: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        for f in 0..homs.len() {
            for (a, &id) in identities.iter().enumerate() {
                if homs[f].src == a {
                    compose[f][id] = Some(f);
                }
                if homs[f].dst == a {
                    compose[id][f] = Some(f);
                }
            }
        }
        let c = Self {
            objects,
            homs,
            identities,
            compose,
        };
        c.validate()?;
        Ok(c)
    }

    /// Thin category of a preorder: one morphism `i → j` whenever `leq[i][j]`.
    pub fn from_poset(objects: Vec<String>, leq: &[Vec<bool>]) -> Result<Self> {
        let n = objects.len();
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(bad("order relation does not match the objects"));
        }
        let (mut homs, identities) = Self::with_identities(objects.clone());
        let mut index = HashMap::new();
        for (i, &id) in identities.iter().enumerate() {
            index.insert((i, i), id);
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] {
                    index.insert((i, j), homs.len());
                    homs.push(Hom {
                        name: format!("{}<={}", objects[i], objects[j]),
                        src: i,
                        dst: j,
                    });
                }
            }
        }
        let m = homs.len();
        let mut compose = vec![vec![None; m]; m];
        for f in 0..m {
            for g in 0..m {
                if homs[f].dst == homs[g].src {
                    let h = index
                        .get(&(homs[f].src, homs[g].dst))
                        .ok_or_else(|| bad("order relation is not transitive"))?;
                    compose[g][f] = Some(*h);
                }
            }
        }
        Self::finish(objects, homs, identities, compose)
    }

    pub fn discrete(n: usize) -> Result<Self> {
        Self::from_poset((0..n).map(|i| i.to_string()).collect(), &vec![vec![false; n]; n])
    }

    /// Chain `0 ≤ 1 ≤ … ≤ n−1`.
    pub fn chain(n: usize) -> Result<Self> {
        let leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        Self::from_poset((0..n).map(|i| i.to_string()).collect(), &leq)
    }

    /// Poset of a context category, objects named by context id.
    pub fn from_context_category(cat: &ContextCategory) -> Result<Self> {
        let names = cat.contexts().iter().map(|v| v.id().to_string()).collect();
        Self::from_poset(names, cat.leq_matrix())
    }

    /// One-object category whose morphisms are the group elements.
    pub fn from_group(g: &FiniteGroup) -> Result<Self> {
        let homs: Vec<Hom> = g
            .names
            .iter()
            .map(|n| Hom {
                name: n.clone(),
                src: 0,
                dst: 0,
            })
            .collect();
        let compose = (0..g.order())
            .map(|a| (0..g.order()).map(|b| Some(g.mul(a, b))).collect())
            .collect();
        let c = Self {
            objects: vec!["*".into()],
            homs,
            identities: vec![g.identity],
            compose,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_spec(spec: &CategorySpec) -> Result<Self> {
        let obj_index: HashMap<&str, usize> = spec.objects.iter().enumerate().map(|(i, o)| (o.as_str(), i)).collect();
        if obj_index.len() != spec.objects.len() {
            return Err(bad("duplicate object"));
        }
        let (mut homs, identities) = Self::with_identities(spec.objects.clone());
        let lookup_obj = |o: &str| {
            obj_index
                .get(o)
                .copied()
                .ok_or_else(|| bad(format!("unknown object {o}")))
        };
        for h in &spec.homs {
            homs.push(Hom {
                name: h.name.clone(),
                src: lookup_obj(&h.src)?,
                dst: lookup_obj(&h.dst)?,
            });
        }
        let hom_index: HashMap<&str, usize> = homs.iter().enumerate().map(|(i, h)| (h.name.as_str(), i)).collect();
        if hom_index.len() != homs.len() {
            return Err(bad("duplicate morphism name"));
        }
        let m = homs.len();
        let mut compose = vec![vec![None; m]; m];
        for [g, f, h] in &spec.composition {
            let get = |n: &str| {
                hom_index
                    .get(n)
                    .copied()
                    .ok_or_else(|| bad(format!("unknown morphism {n}")))
            };
            let (g, f, h) = (get(g)?, get(f)?, get(h)?);
            if compose[g][f].replace(h).is_some_and(|old| old != h) {
                return Err(bad(format!(
                    "conflicting composites for {} after {}",
                    homs[g].name, homs[f].name
                )));
            }
        }
        Self::finish(spec.objects.clone(), homs, identities, compose)
    }

    fn validate(&self) -> Result<()> {
        let m = self.homs.len();
        for f in 0..m {
            for g in 0..m {
                let composable = self.homs[f].dst == self.homs[g].src;
                match (composable, self.compose[g][f]) {
                    (true, None) => {
                        return Err(bad(format!(
                            "missing composite {} after {}",
                            self.homs[g].name, self.homs[f].name
                        )))
                    }
                    (false, Some(_)) => {
                        return Err(bad(format!(
                            "composite given for non-composable {} after {}",
                            self.homs[g].name, self.homs[f].name
                        )))
                    }
                    (true, Some(h)) if self.homs[h].src != self.homs[f].src || self.homs[h].dst != self.homs[g].dst => {
                        return Err(bad(format!("composite {} has the wrong type", self.homs[h].name)))
                    }
                    _ => {}
                }
            }
        }
        for (a, &id) in self.identities.iter().enumerate() {
            for f in 0..m {
                if self.homs[f].src == a && self.compose[f][id] != Some(f) {
                    return Err(bad(format!("right identity law fails for {}", self.homs[f].name)));
                }
                if self.homs[f].dst == a && self.compose[id][f] != Some(f) {
                    return Err(bad(format!("left identity law fails for {}", self.homs[f].name)));
                }
            }
        }
        for f in 0..m {
            for g in 0..m {
                let Some(gf) = self.compose[g][f] else { continue };
                for h in 0..m {
                    let Some(hg) = self.compose[h][g] else { continue };
                    if self.compose[h][gf] != self.compose[hg][f] {
                        return Err(bad("composition is not associative"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn homs(&self) -> &[Hom] {
        &self.homs
    }

    pub fn identity(&self, object: usize) -> usize {
        self.identities[object]
    }

    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.compose[g][f]
    }

    pub fn inverse(&self, f: usize) -> Option<usize> {
        let h = &self.homs[f];
        (0..self.homs.len()).find(|&g| {
            self.compose[g][f] == Some(self.identities[h.src]) && self.compose[f][g] == Some(self.identities[h.dst])
        })
    }

    fn homs_between(&self, a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.homs.len()).filter(move |&f| self.homs[f].src == a && self.homs[f].dst == b)
    }
}

/// An invertible endofunctor, given by its action on objects and morphisms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Autoequivalence {
    pub objects: Vec<usize>,
    pub homs: Vec<usize>,
}

impl Autoequivalence {
    pub fn identity(c: &FiniteCategory) -> Self {
        Self {
            objects: (0..c.objects.len()).collect(),
            homs: (0..c.homs.len()).collect(),
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Self) -> Self {
        Self {
            objects: self.objects.iter().map(|&a| other.objects[a]).collect(),
            homs: self.homs.iter().map(|&f| other.homs[f]).collect(),
        }
    }

    /// Replays functoriality and bijectivity.
    pub fn is_valid(&self, c: &FiniteCategory) -> bool {
        let bijective = |map: &[usize], n: usize| {
            let mut seen = vec![false; n];
            map.len() == n && map.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        };
        if !bijective(&self.objects, c.objects.len()) || !bijective(&self.homs, c.homs.len()) {
            return false;
        }
        let typed = c.homs.iter().enumerate().all(|(f, h)| {
            let img = &c.homs[self.homs[f]];
            img.src == self.objects[h.src] && img.dst == self.objects[h.dst]
        });
        let units = (0..c.objects.len()).all(|a| self.homs[c.identity(a)] == c.identity(self.objects[a]));
        let composition = (0..c.homs.len()).all(|f| {
            (0..c.homs.len()).all(|g| match c.compose(g, f) {
                Some(h) => c.compose(self.homs[g], self.homs[f]) == Some(self.homs[h]),
                None => true,
            })
        });
        typed && units && composition
    }
}

/// A natural isomorphism `source ⇒ target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoCell {
    pub source: Autoequivalence,
    pub target: Autoequivalence,
    /// Component at each object: `source(a) → target(a)`.
    pub components: Vec<usize>,
}

impl TwoCell {
    pub fn identity(f: &Autoequivalence, c: &FiniteCategory) -> Self {
        Self {
            source: f.clone(),
            target: f.clone(),
            components: f.objects.iter().map(|&a| c.identity(a)).collect(),
        }
    }

    /// Replays typing, invertibility and every naturality square.
    pub fn is_natural(&self, c: &FiniteCategory) -> bool {
        if self.components.len() != c.objects.len() {
            return false;
        }
        let typed = (0..c.objects.len()).all(|a| {
            let h = &c.homs[self.components[a]];
            h.src == self.source.objects[a]
                && h.dst == self.target.objects[a]
                && c.inverse(self.components[a]).is_some()
        });
        typed
            && c.homs.iter().enumerate().all(|(f, h)| {
                c.compose(self.target.homs[f], self.components[h.src])
                    == c.compose(self.components[h.dst], self.source.homs[f])
            })
    }
}

fn check_shape(c: &FiniteCategory, cells: &[&TwoCell]) -> Result<()> {
    if cells.iter().any(|t| t.components.len() != c.objects.len()) {
        return Err(Error::NotComposable("2-cell lives over a different category".into()));
    }
    Ok(())
}

/// `β · α : F ⇒ H` for `α : F ⇒ G`, `β : G ⇒ H`.
pub fn compose_vertical(alpha: &TwoCell, beta: &TwoCell, c: &FiniteCategory) -> Result<TwoCell> {
    check_shape(c, &[alpha, beta])?;
    if alpha.target != beta.source {
        return Err(Error::NotComposable(
            "target of the first 2-cell is not the source of the second".into(),
        ));
    }
    let components = (0..c.objects.len())
        .map(|a| {
            c.compose(beta.components[a], alpha.components[a])
                .ok_or_else(|| Error::NotComposable("components do not compose".into()))
        })
        .collect::<Result<_>>()?;
    Ok(TwoCell {
        source: alpha.source.clone(),
        target: beta.target.clone(),
        components,
    })
}

/// `β ∗ α : F′F ⇒ G′G` for `α : F ⇒ G`, `β : F′ ⇒ G′`.
pub fn compose_horizontal(alpha: &TwoCell, beta: &TwoCell, c: &FiniteCategory) -> Result<TwoCell> {
    check_shape(c, &[alpha, beta])?;
    let components = (0..c.objects.len())
        .map(|a| {
            let outer = beta.components[alpha.target.objects[a]];
            let inner = beta.source.homs[alpha.components[a]];
            c.compose(outer, inner)
                .ok_or_else(|| Error::NotComposable("components do not compose".into()))
        })
        .collect::<Result<_>>()?;
    Ok(TwoCell {
        source: alpha.source.then(&beta.source),
        target: alpha.target.then(&beta.target),
        components,
    })
}

/// `(δ·γ) ∗ (β·α) = (δ∗β) · (γ∗α)`.
pub fn check_interchange(
    alpha: &TwoCell,
    beta: &TwoCell,
    gamma: &TwoCell,
    delta: &TwoCell,
    c: &FiniteCategory,
) -> Result<bool> {
    let lhs = compose_horizontal(
        &compose_vertical(alpha, beta, c)?,
        &compose_vertical(gamma, delta, c)?,
        c,
    )?;
    let rhs = compose_vertical(
        &compose_horizontal(alpha, gamma, c)?,
        &compose_horizontal(beta, delta, c)?,
        c,
    )?;
    Ok(lhs == rhs)
}

fn object_maps(c: &FiniteCategory) -> Vec<Vec<usize>> {
    let n = c.objects.len();
    let count = |a: usize, b: usize| c.homs_between(a, b).count();
    let counts: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| count(a, b)).collect()).collect();
    let mut out = Vec::new();
    let mut map = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(counts: &[Vec<usize>], map: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let i = map.len();
        if i == counts.len() {
            out.push(map.clone());
            return;
        }
        for t in 0..counts.len() {
            if used[t] || counts[i][i] != counts[t][t] {
                continue;
            }
            let consistent = (0..i).all(|j| counts[i][j] == counts[t][map[j]] && counts[j][i] == counts[map[j]][t]);
            if !consistent {
                continue;
            }
            used[t] = true;
            map.push(t);
            go(counts, map, used, out);
            map.pop();
            used[t] = false;
        }
    }
    go(&counts, &mut map, &mut used, &mut out);
    out
}

fn hom_maps(c: &FiniteCategory, objects: &[usize]) -> Vec<Autoequivalence> {
    let m = c.homs.len();
    let mut out = Vec::new();
    let mut map: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; m];
    for (a, &id) in c.identities.iter().enumerate() {
        let img = c.identity(objects[a]);
        map[id] = Some(img);
        used[img] = true;
    }
    let free: Vec<usize> = (0..m).filter(|&f| map[f].is_none()).collect();

    fn consistent(c: &FiniteCategory, map: &[Option<usize>], f: usize) -> bool {
        (0..map.len()).all(|x| {
            (0..map.len()).all(|y| {
                let Some(h) = c.compose(x, y) else { return true };
                if x != f && y != f && h != f {
                    return true;
                }
                match (map[x], map[y], map[h]) {
                    (Some(cx), Some(cy), Some(ch)) => c.compose(cx, cy) == Some(ch),
                    _ => true,
                }
            })
        })
    }

    fn go(
        k: usize,
        free: &[usize],
        c: &FiniteCategory,
        objects: &[usize],
        map: &mut Vec<Option<usize>>,
        used: &mut [bool],
        out: &mut Vec<Autoequivalence>,
    ) {
        if k == free.len() {
            out.push(Autoequivalence {
                objects: objects.to_vec(),
                homs: map.iter().map(|x| x.expect("complete")).collect(),
            });
            return;
        }
        let f = free[k];
        let (src, dst) = (objects[c.homs[f].src], objects[c.homs[f].dst]);
        let candidates: Vec<usize> = c.homs_between(src, dst).collect();
        for t in candidates {
            if used[t] {
                continue;
            }
            map[f] = Some(t);
            used[t] = true;
            if consistent(c, map, f) {
                go(k + 1, free, c, objects, map, used, out);
            }
            used[t] = false;
            map[f] = None;
        }
    }

    go(0, &free, c, objects, &mut map, &mut used, &mut out);
    out
}

/// All autoequivalences (category automorphisms), ordered by object map then
/// morphism map.
pub fn autoequivalences(c: &FiniteCategory, limit: usize) -> Result<Vec<Autoequivalence>> {
    if c.objects.len() > limit {
        return Err(Error::SizeLimitExceeded {
            what: "category objects".into(),
            limit,
        });
    }
    if c.homs.len() > MAX_MORPHISMS {
        return Err(Error::SizeLimitExceeded {
            what: "category morphisms".into(),
            limit: MAX_MORPHISMS,
        });
    }
    let mut all: Vec<Autoequivalence> = object_maps(c)
        .par_iter()
        .flat_map_iter(|objects| hom_maps(c, objects))
        .collect();
    all.sort();
    Ok(all)
}

/// All natural isomorphisms `source ⇒ target`.
pub fn two_cells_between(source: &Autoequivalence, target: &Autoequivalence, c: &FiniteCategory) -> Vec<TwoCell> {
    let n = c.objects.len();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            c.homs_between(source.objects[a], target.objects[a])
                .filter(|&h| c.inverse(h).is_some())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut comps = Vec::with_capacity(n);
    fn go(
        c: &FiniteCategory,
        source: &Autoequivalence,
        target: &Autoequivalence,
        candidates: &[Vec<usize>],
        comps: &mut Vec<usize>,
        out: &mut Vec<TwoCell>,
    ) {
        let a = comps.len();
        if a == candidates.len() {
            out.push(TwoCell {
                source: source.clone(),
                target: target.clone(),
                components: comps.clone(),
            });
            return;
        }
        for &h in &candidates[a] {
            comps.push(h);
            let natural = c.homs.iter().enumerate().all(|(f, hom)| {
                if hom.src > a || hom.dst > a {
                    return true;
                }
                c.compose(target.homs[f], comps[hom.src]) == c.compose(comps[hom.dst], source.homs[f])
            });
            if natural {
                go(c, source, target, candidates, comps, out);
            }
            comps.pop();
        }
    }
    go(c, source, target, &candidates, &mut comps, &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct Aut2Group {
    pub autoequivalences: Vec<Autoequivalence>,
    pub two_cells: Vec<TwoCell>,
}

/// Autoequivalences of `c` and every natural isomorphism between them.
pub fn aut_2group(c: &FiniteCategory, limit: usize) -> Result<Aut2Group> {
    let autos = autoequivalences(c, limit)?;
    let two_cells = autos
        .iter()
        .flat_map(|f| autos.iter().map(move |g| (f, g)))
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|(f, g)| two_cells_between(f, g, c))
        .collect();
    Ok(Aut2Group {
        autoequivalences: autos,
        two_cells,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InterchangeReport {
    pub status: Status,
    pub objects: usize,
    pub morphisms: usize,
    pub autoequivalences: usize,
    pub two_cells: usize,
    pub functors_valid: bool,
    pub two_cells_natural: bool,
    pub quadruples: usize,
    pub exhaustive: bool,
    pub failures: usize,
}

/// Enumerates the 2-group and checks interchange on every composable
/// quadruple (on the first [`EXHAUSTIVE_TWO_CELLS`] cells when larger).
pub fn interchange_suite(c: &FiniteCategory, limit: usize) -> Result<InterchangeReport> {
    let g = aut_2group(c, limit)?;
    let exhaustive = g.two_cells.len() <= EXHAUSTIVE_TWO_CELLS;
    let cells = &g.two_cells[..g.two_cells.len().min(EXHAUSTIVE_TWO_CELLS)];
    let pairs: Vec<(&TwoCell, &TwoCell)> = cells
        .iter()
        .flat_map(|a| cells.iter().filter(move |b| a.target == b.source).map(move |b| (a, b)))
        .collect();
    let failures: usize = pairs
        .par_iter()
        .map(|(alpha, beta)| {
            pairs
                .iter()
                .map(|(gamma, delta)| check_interchange(alpha, beta, gamma, delta, c).map(|ok| usize::from(!ok)))
                .sum::<Result<usize>>()
        })
        .sum::<Result<usize>>()?;
    let functors_valid = g.autoequivalences.iter().all(|f| f.is_valid(c));
    let two_cells_natural = g.two_cells.iter().all(|t| t.is_natural(c));
    Ok(InterchangeReport {
        status: Status::from_bool(failures == 0 && functors_valid && two_cells_natural),
        objects: c.objects.len(),
        morphisms: c.homs.len(),
        autoequivalences: g.autoequivalences.len(),
        two_cells: g.two_cells.len(),
        functors_valid,
        two_cells_natural,
        quadruples: pairs.len() * pairs.len(),
        exhaustive,
        failures,
    })
}

/// A finite group by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn from_table(name: impl Into<String>, names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        let err = |m: &str| Error::InvalidGroup(m.to_string());
        if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(err("table is not a closed square"));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::SizeLimitExceeded {
                what: "group order".into(),
                limit: MAX_GROUP_ORDER,
            });
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| err("no identity element"))?;
        for a in 0..n {
            if !(0..n).any(|b| table[a][b] == identity && table[b][a] == identity) {
                return Err(err("an element has no inverse"));
            }
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(err("multiplication is not associative"));
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            names,
            table,
            identity,
        })
    }

    fn from_elements<T: Clone + PartialEq>(
        name: String,
        elements: Vec<T>,
        label: impl Fn(&T) -> String,
        mul: impl Fn(&T, &T) -> T,
    ) -> Result<Self> {
        let table = elements
            .iter()
            .map(|a| {
                elements
                    .iter()
                    .map(|b| {
                        let p = mul(a, b);
                        elements.iter().position(|x| *x == p).expect("closed")
                    })
                    .collect()
            })
            .collect();
        Self::from_table(name, elements.iter().map(label).collect(), table)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::from_elements(format!("Z{n}"), (0..n).collect(), |k| k.to_string(), |a, b| (a + b) % n)
    }

    pub fn direct_product(a: &Self, b: &Self) -> Result<Self> {
        let elements: Vec<(usize, usize)> = (0..a.order())
            .flat_map(|i| (0..b.order()).map(move |j| (i, j)))
            .collect();
        Self::from_elements(
            format!("{}x{}", a.name, b.name),
            elements,
            |(i, j)| format!("({},{})", a.names[*i], b.names[*j]),
            |(i, j), (k, l)| (a.mul(*i, *k), b.mul(*j, *l)),
        )
    }

    /// Symmetries of the regular `n`-gon, order `2n`.
    pub fn dihedral(n: usize) -> Result<Self> {
        let elements: Vec<(usize, bool)> = [false, true]
            .into_iter()
            .flat_map(|s| (0..n).map(move |k| (k, s)))
            .collect();
        Self::from_elements(
            format!("D{n}"),
            elements,
            |(k, s)| if *s { format!("sr{k}") } else { format!("r{k}") },
            |(a, f), (b, g)| {
                let b = if *f { (n - b) % n } else { *b };
                ((a + b) % n, f ^ g)
            },
        )
    }

    /// `⟨a, x | a^{2n} = 1, x² = a^n, x a x⁻¹ = a⁻¹⟩`, order `4n`.
    pub fn dicyclic(n: usize) -> Result<Self> {
        let m = 2 * n;
        let elements: Vec<(usize, bool)> = [false, true]
            .into_iter()
            .flat_map(|x| (0..m).map(move |k| (k, x)))
            .collect();
        Self::from_elements(
            format!("Dic{n}"),
            elements,
            |(k, x)| if *x { format!("a{k}x") } else { format!("a{k}") },
            |(k, j), (l, i)| {
                let l = if *j { (m - l) % m } else { *l };
                match (j, i) {
                    (true, true) => ((k + l + n) % m, false),
                    _ => ((k + l) % m, j ^ i),
                }
            },
        )
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == used.len() {
                out.push(cur.clone());
                return;
            }
            for i in 0..used.len() {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    go(cur, used, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut out = Vec::new();
        go(&mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    fn cycle_notation(p: &[usize]) -> String {
        let mut seen = vec![false; p.len()];
        let mut out = String::new();
        for start in 0..p.len() {
            if seen[start] || p[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i.to_string());
                i = p[i];
            }
            out.push_str(&format!("({})", cycle.join(" ")));
        }
        if out.is_empty() {
            "e".into()
        } else {
            out
        }
    }

    fn sign(p: &[usize]) -> bool {
        let inversions = (0..p.len())
            .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        inversions % 2 == 0
    }

    /// Composition `(pq)(i) = p(q(i))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::from_elements(
            format!("S{n}"),
            Self::permutations(n),
            |p| Self::cycle_notation(p),
            |p, q| q.iter().map(|&i| p[i]).collect(),
        )
    }

    pub fn alternating(n: usize) -> Result<Self> {
        let even = Self::permutations(n).into_iter().filter(|p| Self::sign(p)).collect();
        Self::from_elements(
            format!("A{n}"),
            even,
            |p| Self::cycle_notation(p),
            |p, q| q.iter().map(|&i| p[i]).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn element_name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// Decorations `a, b, c, d` of the interchange square whose two evaluation
/// orders `(ab)(cd)` and `(ac)(bd)` disagree.
#[derive(Clone, Debug, Serialize)]
pub struct EckmannHiltonWitness {
    pub decoration: [String; 4],
    pub rows_first: String,
    pub columns_first: String,
    /// The non-commuting pair the disagreement reduces to.
    pub pair: [String; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, Serialize)]
pub struct EckmannHiltonReport {
    pub group: String,
    pub order: usize,
    pub verdict: Verdict,
    pub witness: Option<EckmannHiltonWitness>,
}

pub fn eckmann_hilton_check(g: &FiniteGroup) -> EckmannHiltonReport {
    let n = g.order();
    let mut witness = None;
    'search: for a in std::iter::once(g.identity).chain((0..n).filter(|&x| x != g.identity)) {
        for b in 0..n {
            for c in 0..n {
                for d in std::iter::once(g.identity).chain((0..n).filter(|&x| x != g.identity)) {
                    let rows = g.mul(g.mul(a, b), g.mul(c, d));
                    let cols = g.mul(g.mul(a, c), g.mul(b, d));
                    if rows != cols {
                        let name = |x: usize| g.element_name(x).to_string();
                        witness = Some(EckmannHiltonWitness {
                            decoration: [name(a), name(b), name(c), name(d)],
                            rows_first: name(rows),
                            columns_first: name(cols),
                            pair: [name(b), name(c)],
                        });
                        break 'search;
                    }
                }
            }
        }
    }
    EckmannHiltonReport {
        group: g.name.clone(),
        order: n,
        verdict: if witness.is_some() {
            Verdict::Inconsistent
        } else {
            Verdict::Consistent
        },
        witness,
    }
}

/// One representative of every isomorphism class of groups of order ≤ 12.
pub fn groups_up_to_12() -> Result<Vec<FiniteGroup>> {
    let z = FiniteGroup::cyclic;
    let p = |a: FiniteGroup, b: FiniteGroup| FiniteGroup::direct_product(&a, &b);
    Ok(vec![
        z(1)?,
        z(2)?,
        z(3)?,
        z(4)?,
        p(z(2)?, z(2)?)?,
        z(5)?,
        z(6)?,
        FiniteGroup::symmetric(3)?,
        z(7)?,
        z(8)?,
        p(z(4)?, z(2)?)?,
        p(p(z(2)?, z(2)?)?, z(2)?)?,
        FiniteGroup::dihedral(4)?,
        FiniteGroup::dicyclic(2)?,
        z(9)?,
        p(z(3)?, z(3)?)?,
        z(10)?,
        FiniteGroup::dihedral(5)?,
        z(11)?,
        z(12)?,
        p(z(6)?, z(2)?)?,
        FiniteGroup::alternating(4)?,
        FiniteGroup::dihedral(6)?,
        FiniteGroup::dicyclic(3)?,
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupSuite {
    pub status: Status,
    pub groups: Vec<EckmannHiltonReport>,
    pub mismatches: Vec<String>,
}

/// Eckmann-Hilton verdicts for every group of order ≤ 12 against direct
/// commutativity.
pub fn group_suite() -> Result<GroupSuite> {
    let groups = groups_up_to_12()?;
    let reports: Vec<EckmannHiltonReport> = groups.iter().map(eckmann_hilton_check).collect();
    let mismatches: Vec<String> = groups
        .iter()
        .zip(&reports)
        .filter(|(g, r)| g.is_abelian() != (r.verdict == Verdict::Consistent))
        .map(|(g, _)| g.name.clone())
        .collect();
    Ok(GroupSuite {
        status: Status::from_bool(mismatches.is_empty()),
        groups: reports,
        mismatches,
    })
}

/// Object maps of an autoequivalence, by object name.
pub fn describe(f: &Autoequivalence, c: &FiniteCategory) -> BTreeMap<String, String> {
    f.objects
        .iter()
        .enumerate()
        .map(|(a, &b)| (c.objects[a].clone(), c.objects[b].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_discrete() {
        let chain = FiniteCategory::chain(2).unwrap();
        let g = aut_2group(&chain, DEFAULT_OBJECT_LIMIT).unwrap();
        assert_eq!(g.autoequivalences.len(), 1);
        assert_eq!(g.two_cells.len(), 1);

        let discrete = FiniteCategory::discrete(2).unwrap();
        let g = aut_2group(&discrete, DEFAULT_OBJECT_LIMIT).unwrap();
        assert_eq!(g.autoequivalences.len(), 2);
    }

    #[test]
    fn group_category_has_conjugation_cells() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let c = FiniteCategory::from_group(&s3).unwrap();
        let g = aut_2group(&c, DEFAULT_OBJECT_LIMIT).unwrap();
        // all automorphisms of S3 are inner and the centre is trivial
        assert_eq!(g.autoequivalences.len(), 6);
        assert_eq!(g.two_cells.len(), 36);
        assert!(g.two_cells.iter().all(|t| t.is_natural(&c)));
    }

    #[test]
    fn vertical_mismatch() {
        let c = FiniteCategory::discrete(2).unwrap();
        let g = aut_2group(&c, DEFAULT_OBJECT_LIMIT).unwrap();
        let a = TwoCell::identity(&g.autoequivalences[0], &c);
        let b = TwoCell::identity(&g.autoequivalences[1], &c);
        assert!(matches!(compose_vertical(&a, &b, &c), Err(Error::NotComposable(_))));
        let other = FiniteCategory::discrete(3).unwrap();
        let foreign = TwoCell::identity(&Autoequivalence::identity(&other), &other);
        assert!(matches!(
            compose_horizontal(&a, &foreign, &c),
            Err(Error::NotComposable(_))
        ));
    }

    #[test]
    fn spec_round_trip() {
        let spec: CategorySpec = serde_json::from_str(
            r#"{"objects":["a","b"],"homs":[{"name":"f","src":"a","dst":"b"},{"name":"g","src":"b","dst":"a"}],
                "composition":[["g","f","id_a"],["f","g","id_b"]]}"#,
        )
        .unwrap();
        let c = FiniteCategory::from_spec(&spec).unwrap();
        assert_eq!(c.homs().len(), 4);
        let r = interchange_suite(&c, DEFAULT_OBJECT_LIMIT).unwrap();
        assert!(r.status.is_pass());

        let broken: CategorySpec = serde_json::from_str(
            r#"{"objects":["a","b"],"homs":[{"name":"f","src":"a","dst":"b"},{"name":"g","src":"b","dst":"a"}],
                "composition":[["g","f","id_a"]]}"#,
        )
        .unwrap();
        assert!(matches!(
            FiniteCategory::from_spec(&broken),
            Err(Error::InvalidCategory(_))
        ));
    }

    #[test]
    fn groups() {
        assert_eq!(
            eckmann_hilton_check(&FiniteGroup::cyclic(4).unwrap()).verdict,
            Verdict::Consistent
        );
        assert_eq!(
            eckmann_hilton_check(&FiniteGroup::cyclic(1).unwrap()).verdict,
            Verdict::Consistent
        );
        let s3 = eckmann_hilton_check(&FiniteGroup::symmetric(3).unwrap());
        assert_eq!(s3.verdict, Verdict::Inconsistent);
        let w = s3.witness.unwrap();
        assert_eq!(w.decoration[0], "e");
        assert_ne!(w.rows_first, w.columns_first);
        assert!(matches!(
            FiniteGroup::from_table("bad", vec!["a".into(), "b".into()], vec![vec![0, 0], vec![0, 0]]),
            Err(Error::InvalidGroup(_))
        ));
    }
}
