#![no_main]
use gibbs_fisher_cli::Grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(grid) = Grid::parse(text) {
        if grid.count > 100_000 {
            return;
        }
        let points = grid.points();
        assert_eq!(points.len(), grid.count);
        assert!(points.iter().all(|p| p.is_finite()));
        assert!(points.windows(2).all(|w| w[0] <= w[1]));
    }
});
