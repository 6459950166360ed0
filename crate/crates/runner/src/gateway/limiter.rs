use std::sync::{Condvar, Mutex};

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub struct Limiter {
    free: Mutex<usize>,
    released: Condvar,
}

pub struct Slot<'a>(&'a Limiter);

impl Limiter {
    pub fn new(slots: usize) -> Self {
        Self { free: Mutex::new(slots.max(1)), released: Condvar::new() }
    }

    pub fn acquire(&self) -> Slot<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Slot(self)
    }
}

impl Drop for Slot<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.released.notify_one();
    }
}
