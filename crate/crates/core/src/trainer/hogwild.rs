use std::cell::UnsafeCell;

/// Row storage shared between training threads without locking.
///
/// Concurrent SGD touches a handful of rows per step out of the whole
/// vocabulary; colliding updates are rare and tolerated (Hogwild). With a
/// single thread every access is exclusive and training is deterministic.
pub(crate) struct SharedRows<T> {
    data: UnsafeCell<Vec<T>>,
    dim: usize,
}

unsafe impl<T: Send> Sync for SharedRows<T> {}

impl<T> SharedRows<T> {
    pub fn new(data: Vec<T>, dim: usize) -> Self {
        SharedRows {
            data: UnsafeCell::new(data),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Raw pointer to the start of row `id`.
    ///
    /// # Safety
    /// `id` must be in bounds. Callers accept racy reads and writes from
    /// other threads holding the same `SharedRows`.
    #[inline]
    pub unsafe fn row_ptr(&self, id: u32) -> *mut T {
        let v = &mut *self.data.get();
        debug_assert!((id as usize + 1) * self.dim <= v.len());
        v.as_mut_ptr().add(id as usize * self.dim)
    }

    pub fn into_inner(self) -> Vec<T> {
        self.data.into_inner()
    }
}
