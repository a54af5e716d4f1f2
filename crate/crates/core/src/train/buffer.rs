use std::collections::VecDeque;

use ndarray::Array2;
use rand::Rng;

use crate::critic::JointBatch;
use crate::error::{Error, Result};

/// One environment step of every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRow {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<Vec<f64>>,
}

/// FIFO ring of joint rows.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    rows: VecDeque<JointRow>,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity, rows: VecDeque::new(), inserted: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Total rows ever pushed, evicted ones included.
    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn push(&mut self, row: JointRow) {
        if self.capacity == 0 {
            return;
        }
        if self.rows.len() == self.capacity {
            self.rows.pop_front();
        }
        self.rows.push_back(row);
        self.inserted += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = &JointRow> {
        self.rows.iter()
    }

    /// `size` distinct rows drawn uniformly, laid out per agent.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<JointBatch> {
        if size == 0 {
            return Err(Error::Usage("batch of zero rows".into()));
        }
        if size > self.rows.len() {
            return Err(Error::Usage(format!("batch of {size} from {} stored rows", self.rows.len())));
        }
        let picks = rand::seq::index::sample(rng, self.rows.len(), size);
        let rows: Vec<&JointRow> = picks.iter().map(|i| &self.rows[i]).collect();
        Ok(stack(&rows))
    }
}

/// Lays out rows as per-agent blocks.
pub fn stack(rows: &[&JointRow]) -> JointBatch {
    let n = rows.first().map_or(0, |r| r.rewards.len());
    let block = |get: &dyn Fn(&JointRow) -> &Vec<Vec<f64>>, agent: usize| {
        let cols = rows.first().map_or(0, |r| get(r)[agent].len());
        let mut m = Array2::zeros((rows.len(), cols));
        for (b, r) in rows.iter().enumerate() {
            for (c, v) in get(r)[agent].iter().enumerate() {
                m[[b, c]] = *v;
            }
        }
        m
    };
    JointBatch {
        obs: (0..n).map(|i| block(&|r| &r.obs, i)).collect(),
        actions: (0..n).map(|i| block(&|r| &r.actions, i)).collect(),
        rewards: Array2::from_shape_fn((rows.len(), n), |(b, i)| rows[b].rewards[i]),
        next_obs: (0..n).map(|i| block(&|r| &r.next_obs, i)).collect(),
    }
}
