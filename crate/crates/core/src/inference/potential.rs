/// Non-negative table over the joint states of `scope`, mixed-radix with the
/// last scope variable least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    pub scope: Vec<usize>,
    pub cards: Vec<usize>,
    pub table: Vec<f64>,
}

impl Potential {
    pub fn ones(scope: Vec<usize>, cards: Vec<usize>) -> Self {
        let len = cards.iter().product();
        Potential {
            scope,
            cards,
            table: vec![1.0; len],
        }
    }

    pub fn new(scope: Vec<usize>, cards: Vec<usize>, table: Vec<f64>) -> Self {
        debug_assert_eq!(table.len(), cards.iter().product::<usize>());
        Potential {
            scope,
            cards,
            table,
        }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Stride, in `other`'s table, of each variable of `self`'s scope
    /// (zero for variables `other` does not mention).
    fn strides_into(&self, other: &Potential) -> Vec<usize> {
        let mut other_strides = vec![0; other.scope.len()];
        let mut s = 1;
        for k in (0..other.scope.len()).rev() {
            other_strides[k] = s;
            s *= other.cards[k];
        }
        self.scope
            .iter()
            .map(|v| {
                other
                    .scope
                    .iter()
                    .position(|w| w == v)
                    .map_or(0, |k| other_strides[k])
            })
            .collect()
    }

    /// Calls `f(self_index, other_index)` for every joint state of `self`,
    /// where `other_index` addresses the projection of that state onto
    /// `other`'s scope.
    fn walk(&self, other: &Potential, mut f: impl FnMut(usize, usize)) {
        let strides = self.strides_into(other);
        let n = self.scope.len();
        let mut digits = vec![0usize; n];
        let mut j = 0usize;
        let len: usize = self.cards.iter().product();
        for i in 0..len {
            f(i, j);
            for d in (0..n).rev() {
                digits[d] += 1;
                if digits[d] < self.cards[d] {
                    j += strides[d];
                    break;
                }
                digits[d] = 0;
                j -= (self.cards[d] - 1) * strides[d];
            }
        }
    }

    /// Pointwise product with a potential whose scope is a subset of this one.
    pub fn multiply_in(&mut self, factor: &Potential) {
        debug_assert!(factor.scope.iter().all(|v| self.scope.contains(v)));
        let mut table = std::mem::take(&mut self.table);
        self.walk(factor, |i, j| table[i] *= factor.table[j]);
        self.table = table;
    }

    /// Sums out everything except `onto` (which keeps its given order).
    pub fn marginalize(&self, onto: &[usize]) -> Potential {
        let cards = onto
            .iter()
            .map(|v| {
                let k = self
                    .scope
                    .iter()
                    .position(|w| w == v)
                    .expect("variable in scope");
                self.cards[k]
            })
            .collect();
        let mut out = Potential {
            scope: onto.to_vec(),
            cards,
            table: Vec::new(),
        };
        let mut table = vec![0.0; out.cards.iter().product()];
        self.walk(&out, |i, j| table[j] += self.table[i]);
        out.table = table;
        out
    }

    /// Elementwise `self / other` over identical scopes, with `0/0 = 0`.
    pub fn ratio(&self, other: &Potential) -> Potential {
        debug_assert_eq!(self.scope, other.scope);
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| if b == 0.0 { 0.0 } else { a / b })
            .collect();
        Potential {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            table,
        }
    }

    /// Zeroes entries where `var` takes a disallowed state.
    pub fn restrict(&mut self, var: usize, allowed: &[bool]) {
        let Some(k) = self.scope.iter().position(|&w| w == var) else {
            return;
        };
        let stride: usize = self.cards[k + 1..].iter().product();
        let card = self.cards[k];
        for (i, x) in self.table.iter_mut().enumerate() {
            if !allowed[(i / stride) % card] {
                *x = 0.0;
            }
        }
    }
}
