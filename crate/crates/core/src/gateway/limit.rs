use std::sync::{Condvar, Mutex};

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
pub struct Limiter {
    capacity: usize,
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

pub struct Permit<'a> {
    limiter: &'a Limiter,
}

impl Limiter {
    /// A capacity of zero is treated as one.
    pub fn new(capacity: usize) -> Self {
        Limiter {
            capacity: capacity.max(1),
            state: Mutex::new((0, 0)),
            freed: Condvar::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut state = self.state.lock().expect("limiter poisoned");
        while state.0 >= self.capacity {
            state = self.freed.wait(state).expect("limiter poisoned");
        }
        state.0 += 1;
        state.1 = state.1.max(state.0);
        Permit { limiter: self }
    }

    pub fn peak(&self) -> usize {
        self.state.lock().expect("limiter poisoned").1
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut state = self.limiter.state.lock().expect("limiter poisoned");
        state.0 -= 1;
        self.limiter.freed.notify_one();
    }
}
