use clipforge::preproc_opt::{
    argmax_strengths, fit_policy, optimal_strength, read_argmax_csv, read_sweep_csv, run_sweep, write_argmax_csv,
    write_sweep_csv, StrengthPolicy, SweepGrid, ToyRateEncoder,
};
use clipforge::video_io::synth;

#[test]
fn default_grid_sweep_fit_and_query() {
    let clips = vec![
        synth::textured_clip(48, 48, 6, 30, 11),
        synth::textured_clip(48, 48, 6, 30, 12),
    ];
    let grid = SweepGrid::default();
    let sweep = run_sweep(&clips, &ToyRateEncoder, &grid, 7).unwrap();
    assert_eq!(sweep.cells.len(), 6 * 6 * 8);
    assert!(sweep.holes().is_empty());
    assert!(sweep.cells.iter().all(|c| c.final_psnr.unwrap().is_finite()));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep_csv(std::fs::File::create(&path).unwrap(), &sweep).unwrap();
    let back = read_sweep_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.cells, sweep.cells);

    let table = argmax_strengths(&back);
    assert_eq!(table.len(), 36);
    // Heavier noise never wants a weaker filter at the top rate.
    let top = grid.bitrates[grid.bitrates.len() - 1];
    let at_top: Vec<f64> = table.iter().filter(|e| e.bitrate == top).map(|e| e.strength).collect();
    assert!(at_top[0] >= at_top[at_top.len() - 1], "{at_top:?}");

    let mut buf = Vec::new();
    write_argmax_csv(&mut buf, &table).unwrap();
    let table = read_argmax_csv(&buf[..]).unwrap();

    let s_max = *grid.strengths.last().unwrap();
    let policy = fit_policy(&table, s_max).unwrap();
    let policy = StrengthPolicy::from_json(&policy.to_json()).unwrap();
    assert!(policy.residual_rmse.is_finite());
    for e in &table {
        let s = optimal_strength(&policy, e.sigma, e.bitrate);
        assert!((0.0..=s_max).contains(&s));
    }
    assert_eq!(
        optimal_strength(&policy, 1e3, 1e9),
        optimal_strength(&policy, policy.sigma_range.1, policy.ln_rate_range.1.exp())
    );
}

#[test]
fn noise_free_level_prefers_no_filtering_at_top_rate() {
    let clips = vec![synth::textured_clip(64, 64, 4, 30, 3)];
    let grid = SweepGrid {
        psnr_levels: vec![f64::INFINITY],
        bitrates: vec![8192.0],
        ..SweepGrid::default()
    };
    let sweep = run_sweep(&clips, &ToyRateEncoder, &grid, 1).unwrap();
    let table = argmax_strengths(&sweep);
    assert_eq!(table.len(), 1);
    assert_eq!(table[0].sigma, 0.0);
    assert_eq!(table[0].strength, 0.0);
}
