use motionbrush::ingest::{ingest_stream, ReorderBuffer};
use motionbrush::motion::SensorFrame;
use proptest::prelude::*;

fn frame(dev: u8, t_us: u64) -> SensorFrame {
    SensorFrame { device_id: dev, seq: (t_us / 1000) as u32, t_us, quat: [1.0, 0.0, 0.0, 0.0], acc: [0.0; 3] }
}

proptest! {
    /// Arrival delayed by less than the window: output equals the sorted input.
    #[test]
    fn bounded_jitter_is_fully_repaired(
        n in 1usize..200,
        delays in prop::collection::vec(0u64..20_000, 200),
        devs in prop::collection::vec(0u8..4, 200),
    ) {
        let frames: Vec<_> = (0..n).map(|i| frame(devs[i], 10_000 * (i as u64 + 1))).collect();
        let mut arrival: Vec<_> = frames.iter().zip(&delays).map(|(f, d)| (f.t_us + d, *f)).collect();
        arrival.sort_by_key(|(a, f)| (*a, f.t_us));
        let (out, stats) = ingest_stream(arrival.into_iter().map(|(_, f)| f), 20_000);
        prop_assert_eq!(stats.total_dropped(), 0);
        for d in 0..4 {
            let got: Vec<_> = out.iter().filter(|f| f.device_id == d).map(|f| f.t_us).collect();
            let want: Vec<_> = frames.iter().filter(|f| f.device_id == d).map(|f| f.t_us).collect();
            prop_assert_eq!(got, want);
        }
    }

    /// Any permutation: per-device output strictly increases and nothing is lost
    /// without being counted.
    #[test]
    fn any_permutation_yields_increasing_output(perm in Just((0..120u64).collect::<Vec<_>>()).prop_shuffle()) {
        let input: Vec<_> = perm.iter().map(|&i| frame((i % 4) as u8, 1_000 * (i / 4 + 1) * 7)).collect();
        let (out, stats) = ingest_stream(input.clone(), 20_000);
        for d in 0..4u8 {
            let ts: Vec<_> = out.iter().filter(|f| f.device_id == d).map(|f| f.t_us).collect();
            prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(out.len() as u64 + stats.total_dropped(), input.len() as u64);
        prop_assert_eq!(stats.total_accepted(), out.len() as u64);
    }
}

#[test]
fn in_order_input_passes_through() {
    let frames: Vec<_> = (1..50).map(|i| frame((i % 4) as u8, i * 10_000)).collect();
    let (out, stats) = ingest_stream(frames.clone(), 20_000);
    let mut want = frames;
    let mut got = out;
    want.sort_by_key(|f| (f.device_id, f.t_us));
    got.sort_by_key(|f| (f.device_id, f.t_us));
    assert_eq!(got, want);
    assert_eq!(stats.total_dropped(), 0);
}

#[test]
fn swapped_neighbours_are_reordered() {
    let (out, _) = ingest_stream([frame(0, 10_000), frame(0, 30_000), frame(0, 20_000), frame(0, 40_000)], 20_000);
    assert_eq!(out.iter().map(|f| f.t_us).collect::<Vec<_>>(), [10_000, 20_000, 30_000, 40_000]);
}

#[test]
fn frame_100ms_late_is_dropped_and_counted() {
    let mut buf = ReorderBuffer::new(20_000);
    let mut out = Vec::new();
    for t in (1..=20).map(|i| i * 10_000) {
        buf.push(frame(2, t));
        buf.drain_ready(&mut out);
    }
    buf.push(frame(2, 100_000 - 1));
    buf.drain_ready(&mut out);
    assert_eq!(buf.stats().dropped_late[2], 1);
    buf.push(frame(2, 200_000));
    assert_eq!(buf.stats().dropped_duplicate[2], 1);
}
