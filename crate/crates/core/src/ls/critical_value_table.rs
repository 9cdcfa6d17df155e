// Generated by the sup_wald_critical_values example.

pub const SEED: u64 = 8675309;
pub const PATHS: usize = 100000;
pub const GRID: usize = 10000;

/// `[q - 1][trimming][level]`; trimmings 0.05..0.25, levels 0.10, 0.05, 0.025, 0.01.
pub const VALUES: [[[f64; 4]; 5]; 10] = [
    // q = 1
    [
        [8.2019, 9.7704, 11.3250, 13.3092],
        [7.6479, 9.2346, 10.7336, 12.8066],
        [7.2393, 8.7925, 10.3001, 12.3047],
        [6.8457, 8.3940, 9.8867, 11.8388],
        [6.4594, 7.9749, 9.5102, 11.4101],
    ],
    // q = 2
    [
        [11.1685, 12.8756, 14.4904, 16.6375],
        [10.5363, 12.2648, 13.8723, 16.0034],
        [10.0561, 11.7619, 13.3554, 15.4814],
        [9.6150, 11.2939, 12.9511, 15.0607],
        [9.1735, 10.8756, 12.5082, 14.5730],
    ],
    // q = 3
    [
        [13.6137, 15.4603, 17.2045, 19.5298],
        [12.8922, 14.7724, 16.5633, 18.8591],
        [12.3735, 14.2279, 16.0167, 18.2982],
        [11.8843, 13.7499, 15.5238, 17.7332],
        [11.3951, 13.2303, 15.0296, 17.2088],
    ],
    // q = 4
    [
        [15.6890, 17.6086, 19.4861, 21.8143],
        [14.9788, 16.9258, 18.7930, 21.2044],
        [14.4007, 16.3568, 18.1948, 20.6332],
        [13.8913, 15.8644, 17.7480, 20.1567],
        [13.3778, 15.3170, 17.2460, 19.6366],
    ],
    // q = 5
    [
        [17.7173, 19.7627, 21.6962, 24.1594],
        [16.9661, 19.0028, 20.9576, 23.4774],
        [16.3812, 18.4410, 20.4441, 22.9382],
        [15.8284, 17.8918, 19.9156, 22.4754],
        [15.2866, 17.3552, 19.3708, 21.8966],
    ],
    // q = 6
    [
        [19.5911, 21.6291, 23.5747, 26.1519],
        [18.8053, 20.8844, 22.8180, 25.4286],
        [18.1898, 20.2739, 22.2598, 24.8592],
        [17.6582, 19.7525, 21.7541, 24.2775],
        [17.0916, 19.1785, 21.1758, 23.6791],
    ],
    // q = 7
    [
        [21.3719, 23.5342, 25.5906, 28.1422],
        [20.5553, 22.7383, 24.8361, 27.4408],
        [19.9296, 22.1023, 24.3020, 26.9303],
        [19.3326, 21.5371, 23.7382, 26.3940],
        [18.7429, 20.9503, 23.1700, 25.8804],
    ],
    // q = 8
    [
        [23.2039, 25.3899, 27.5126, 30.1686],
        [22.3659, 24.5915, 26.7543, 29.4066],
        [21.7287, 24.0021, 26.1693, 28.7285],
        [21.1231, 23.3911, 25.5535, 28.1043],
        [20.4511, 22.7534, 24.9105, 27.5417],
    ],
    // q = 9
    [
        [24.8333, 27.0955, 29.2510, 31.8194],
        [23.9924, 26.2550, 28.4727, 31.1024],
        [23.3091, 25.6553, 27.8758, 30.5320],
        [22.6312, 25.0630, 27.2557, 29.8901],
        [22.0008, 24.3925, 26.5838, 29.3804],
    ],
    // q = 10
    [
        [26.5535, 28.8902, 31.1420, 33.8932],
        [25.6634, 28.1114, 30.3319, 33.1132],
        [24.9605, 27.4230, 29.5855, 32.4163],
        [24.2370, 26.7185, 29.0229, 31.9208],
        [23.5783, 26.0502, 28.3538, 31.2299],
    ],
];
