// Measurement CSV of the bundled reference source (mirrors the engine's
// fixture; values in meter units are cm and mW/cm^2 on the wire).

export const REFERENCE_SOURCE_CSV = `distance_cm,irradiance_mW_cm2
0,11.43
1,12.046
2,23.345
3,16.824
4,5.057
5,2.42
6,1.375
7,0.722
8,0.722
9,0.722
10,0.053
11,0.053
12,0.031
13,0.031
14,0.031
15,0.031
16,0
`;
