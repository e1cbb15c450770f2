// Small scenarios shared by the integration tests.

#![allow(dead_code)]

/// Fig2-like heralded run shortened to a fraction of a damping time.
pub const SHORT_HERALDED: &str = r#"
name = "short"
run = "ode"
channels = ["heralded", "trace"]
pre_up = 1.0
pre_down = 1.0
post_up = 0.0
post_down = 1.0
lambda = 0.001
kappa_over_lambda = 0.01
nbar0 = 0.1
delta_t = 41
t_end = 20000
samples = 40
cutoff = 16
outputs = ["mean_phonons", "g2", "pn", "wigner", "pump_sweep", "linewidth_sweep"]
pump_sweep = [0.5, 1.0, 2.0]
wigner_extent = 2.0
wigner_points = 9
"#;

pub const SHORT_DISCRETE: &str = r#"
name = "spins"
run = "discrete"
pre_up = 1.0
pre_down = 1.0
lambda = 0.06
nbar0 = 0.1
delta_t = 35
n_spins = 12
sampling = "sampled"
seed = 11
cutoff = 12
channels = ["trace"]
ps_grid = [0.2]
n_eigen_targets = [0.5]
eigenstate_reference = true
outputs = ["mean_phonons"]
"#;

pub fn with_line(base: &str, key: &str, line: &str) -> String {
    let kept: Vec<&str> = base
        .lines()
        .filter(|l| l.split('=').next().unwrap().trim() != key)
        .collect();
    kept.join("\n") + "\n" + line + "\n"
}
