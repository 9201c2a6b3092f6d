//! Total vertex-to-vertex maps with preimage multiplicity accounting.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    source_n: usize,
    target_n: usize,
    image: Vec<u32>,
}

impl VertexMap {
    pub fn new(target_n: usize, image: Vec<u32>) -> Self {
        assert!(
            image.iter().all(|&v| (v as usize) < target_n),
            "image out of range"
        );
        VertexMap {
            source_n: image.len(),
            target_n,
            image,
        }
    }

    pub fn identity(n: usize) -> Self {
        VertexMap::new(n, (0..n as u32).collect())
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn target_n(&self) -> usize {
        self.target_n
    }

    pub fn apply(&self, v: u32) -> u32 {
        self.image[v as usize]
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    /// self: A -> B composed with g: B -> C, giving A -> C.
    pub fn then(&self, g: &VertexMap) -> VertexMap {
        assert_eq!(self.target_n, g.source_n, "composition size mismatch");
        VertexMap::new(
            g.target_n,
            self.image.iter().map(|&v| g.apply(v)).collect(),
        )
    }

    pub fn preimage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.target_n];
        for &v in &self.image {
            counts[v as usize] += 1;
        }
        counts
    }

    pub fn max_multiplicity(&self) -> usize {
        self.preimage_counts().into_iter().max().unwrap_or(0)
    }

    pub fn is_injective(&self) -> bool {
        self.max_multiplicity() <= 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_and_multiplicity() {
        let f = VertexMap::new(3, vec![0, 1, 1, 2]);
        let g = VertexMap::new(2, vec![0, 0, 1]);
        let h = f.then(&g);
        assert_eq!(h.image(), &[0, 0, 0, 1]);
        assert_eq!(h.max_multiplicity(), 3);
        assert!(!f.is_injective());
        assert!(VertexMap::identity(5).is_injective());
    }
}
