//! Parallel trial execution. Each trial owns its seed-derived state and
//! writes its own files; ordering of results follows trial index, so the
//! worker count never changes any output byte.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Worker cap: `SCHATTEN_LR_THREADS` if set, else available parallelism,
/// never more than the number of trials.
pub fn worker_count(trials: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("SCHATTEN_LR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(hw);
    cap.min(trials).max(1)
}

/// Runs `job(trial_index)` for every trial on a bounded worker pool and
/// returns results in trial order. Panics in jobs propagate.
pub fn run_trials<T, F>(trials: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count(trials);
    let mut slots: Vec<Option<T>> = (0..trials).map(|_| None).collect();
    if workers <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(job(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let slot_refs: Vec<std::sync::Mutex<&mut Option<T>>> =
            slots.iter_mut().map(std::sync::Mutex::new).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= trials {
                        break;
                    }
                    let out = job(i);
                    **slot_refs[i].lock().unwrap() = Some(out);
                });
            }
        });
    }
    slots.into_iter().map(|s| s.expect("trial completed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_trial_order() {
        let out = run_trials(17, |i| i * i);
        assert_eq!(out, (0..17).map(|i| i * i).collect::<Vec<_>>());
    }
}
