use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use crate::ultrametric::cartesian;

type Component<V> = Arc<dyn Fn(&[V]) -> V + Send + Sync>;

/// An operator on a product domain `M_1 x ... x M_k`, given as its `k`
/// component maps `σ_i : M -> M_i`.
#[derive(Clone)]
pub struct DecomposedOperator<V> {
    domains: Vec<Vec<V>>,
    components: Vec<Component<V>>,
}

impl<V: Debug> Debug for DecomposedOperator<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecomposedOperator")
            .field("domains", &self.domains)
            .finish_non_exhaustive()
    }
}

impl<V> DecomposedOperator<V>
where
    V: Clone + Eq + Hash + Debug + Send + Sync + 'static,
{
    pub fn from_components(domains: Vec<Vec<V>>, components: Vec<Component<V>>) -> Self {
        assert_eq!(
            domains.len(),
            components.len(),
            "one component map per domain"
        );
        Self {
            domains,
            components,
        }
    }

    /// Splits a whole-state map into its coordinate projections.
    pub fn from_map<F>(domains: Vec<Vec<V>>, map: F) -> Self
    where
        F: Fn(&[V]) -> Vec<V> + Send + Sync + 'static,
    {
        let map = Arc::new(map);
        let components = (0..domains.len())
            .map(|i| {
                let map = Arc::clone(&map);
                Arc::new(move |x: &[V]| map(x).swap_remove(i)) as Component<V>
            })
            .collect();
        Self {
            domains,
            components,
        }
    }

    /// An operator given by its full table over [`Self::states`] order.
    pub fn from_table(domains: Vec<Vec<V>>, images: Vec<Vec<V>>) -> Self {
        let states = cartesian(&domains);
        assert_eq!(
            states.len(),
            images.len(),
            "table must cover the product domain"
        );
        let lookup: std::collections::HashMap<Vec<V>, Vec<V>> =
            states.into_iter().zip(images).collect();
        Self::from_map(domains, move |x| lookup[x].clone())
    }

    pub fn processor_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Vec<V>] {
        &self.domains
    }

    pub fn component(&self, i: usize, state: &[V]) -> V {
        (self.components[i])(state)
    }

    /// `σ(x) = (σ_1(x), ..., σ_k(x))`.
    pub fn apply(&self, state: &[V]) -> Vec<V> {
        self.components.iter().map(|c| c(state)).collect()
    }

    /// Every state of the product domain, last coordinate varying fastest.
    pub fn states(&self) -> Vec<Vec<V>> {
        cartesian(&self.domains)
    }

    pub fn state_count(&self) -> usize {
        self.domains.iter().map(Vec::len).product()
    }

    pub fn contains(&self, state: &[V]) -> bool {
        state.len() == self.domains.len()
            && state.iter().zip(&self.domains).all(|(v, d)| d.contains(v))
    }

    pub fn fixed_points(&self) -> Vec<Vec<V>> {
        self.states()
            .into_iter()
            .filter(|s| &self.apply(s) == s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembled_map_agrees_with_components() {
        let op = DecomposedOperator::from_map(vec![vec![0u8, 1], vec![0, 1]], |x: &[u8]| {
            vec![x[1], x[0]]
        });
        for s in op.states() {
            let img = op.apply(&s);
            for (i, v) in img.iter().enumerate() {
                assert_eq!(op.component(i, &s), *v);
            }
        }
        assert_eq!(op.fixed_points(), vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(op.state_count(), 4);
    }

    #[test]
    fn table_operator() {
        let doms = vec![vec![0u8, 1], vec![0, 1]];
        let op = DecomposedOperator::from_table(doms, vec![vec![1, 1]; 4]);
        assert_eq!(op.apply(&[0, 1]), vec![1, 1]);
        assert!(op.contains(&[1, 0]));
        assert!(!op.contains(&[2, 0]));
    }
}
