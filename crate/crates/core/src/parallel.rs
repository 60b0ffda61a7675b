//! Deterministic data parallelism.
//!
//! Work items are independent and land in preallocated slots, so results are
//! bit-identical regardless of the thread count. `FRACLAP_THREADS` caps the
//! number of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};

pub fn thread_cap() -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("FRACLAP_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n > 0).unwrap_or(available).min(available),
        Err(_) => available,
    }
}

/// Map `f` over `0..len` into a vector; slot `i` always holds `f(i)`.
pub fn par_map<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let threads = thread_cap().min(len.max(1));
    if threads <= 1 || len < 2 {
        return (0..len).map(f).collect();
    }

    let mut out: Vec<Option<R>> = (0..len).map(|_| None).collect();
    let next = AtomicUsize::new(0);
    let slots = out.as_mut_slice();
    // Hand each worker a raw base pointer; every index is claimed exactly once
    // through the shared counter, so no slot is written twice.
    struct SendPtr<R>(*mut Option<R>);
    unsafe impl<R: Send> Send for SendPtr<R> {}
    unsafe impl<R: Send> Sync for SendPtr<R> {}
    let base = SendPtr(slots.as_mut_ptr());
    let base_ref = &base;

    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= len {
                    break;
                }
                let value = f(i);
                unsafe {
                    *base_ref.0.add(i) = Some(value);
                }
            });
        }
    });

    out.into_iter()
        .map(|v| v.expect("every slot filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let v = par_map(1000, |i| i * i);
        for (i, &x) in v.iter().enumerate() {
            assert_eq!(x, i * i);
        }
    }

    #[test]
    fn par_map_empty_and_single() {
        assert!(par_map(0, |i| i).is_empty());
        assert_eq!(par_map(1, |i| i + 7), vec![7]);
    }
}
