//! Deterministic fan-out of independent replicates across worker threads.

/// Worker count: the `IPSLAB_THREADS` environment variable when set,
/// otherwise the available parallelism.
pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var("IPSLAB_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Run `f(replicate_index)` for every index in `0..runs`, possibly in
/// parallel, and return the results sorted by index. Each replicate owns
/// its state; aggregation order is independent of scheduling.
pub fn run_replicates<T, F>(runs: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let workers = worker_count().min(runs.max(1) as usize);
    if workers <= 1 || runs <= 1 {
        return (0..runs).map(f).collect();
    }
    let next = std::sync::atomic::AtomicU64::new(0);
    let mut slots: Vec<Option<T>> = (0..runs).map(|_| None).collect();
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= runs {
                    break;
                }
                let value = f(idx);
                let mut guard = slots_ref.lock().expect("no panics while holding the lock");
                guard[idx as usize] = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every replicate index was visited"))
        .collect()
}
