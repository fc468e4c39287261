//! Fixed Gauss-Kronrod and Gauss-Legendre rules.

use std::sync::OnceLock;

/// A symmetric Gauss-Kronrod pair on [-1, 1]. `xk` holds the non-negative
/// Kronrod abscissae in decreasing order, ending with 0; odd positions are
/// the Gauss abscissae, whose weights are `wg`.
pub struct GaussKronrod {
    pub xk: &'static [f64],
    pub wk: &'static [f64],
    pub wg: &'static [f64],
}

pub static GK21: GaussKronrod = GaussKronrod {
    xk: &[
        0.995_657_163_025_808_080_735_527_280_689_003,
        0.973_906_528_517_171_720_077_964_012_084_452,
        0.930_157_491_355_708_226_001_207_180_059_508,
        0.865_063_366_688_984_510_732_096_688_423_493,
        0.780_817_726_586_416_897_063_717_578_345_042,
        0.679_409_568_299_024_406_234_327_365_114_874,
        0.562_757_134_668_604_683_339_000_099_272_694,
        0.433_395_394_129_247_190_799_265_943_165_784,
        0.294_392_862_701_460_198_131_126_603_103_866,
        0.148_874_338_981_631_210_884_826_001_129_720,
        0.0,
    ],
    wk: &[
        0.011_694_638_867_371_874_278_064_396_062_192,
        0.032_558_162_307_964_727_478_818_972_459_390,
        0.054_755_896_574_351_996_031_381_300_244_580,
        0.075_039_674_810_919_952_767_043_140_916_190,
        0.093_125_454_583_697_605_535_065_465_083_366,
        0.109_387_158_802_297_641_899_210_590_325_805,
        0.123_491_976_262_065_851_077_208_626_268_816,
        0.134_709_217_311_473_325_928_054_001_771_707,
        0.142_775_938_577_060_080_797_094_273_138_717,
        0.147_739_104_901_338_491_374_841_515_972_068,
        0.149_445_554_002_916_905_664_936_468_389_821,
    ],
    wg: &[
        0.066_671_344_308_688_137_593_568_809_893_332,
        0.149_451_349_150_580_593_145_776_339_657_697,
        0.219_086_362_515_982_043_995_534_934_228_163,
        0.269_266_719_309_996_355_091_226_921_569_469,
        0.295_524_224_714_752_870_173_892_994_651_338,
    ],
};

pub static GK15: GaussKronrod = GaussKronrod {
    xk: &[
        0.991_455_371_120_812_639_206_854_697_526_329,
        0.949_107_912_342_758_524_526_189_684_047_851,
        0.864_864_423_359_769_072_789_712_788_640_926,
        0.741_531_185_599_394_439_863_864_773_280_788,
        0.586_087_235_467_691_130_294_144_845_693_013,
        0.405_845_151_377_397_166_906_606_412_076_961,
        0.207_784_955_007_898_467_600_689_403_773_245,
        0.0,
    ],
    wk: &[
        0.022_935_322_010_529_224_963_732_008_058_970,
        0.063_092_092_629_978_553_290_700_663_189_204,
        0.104_790_010_322_250_183_839_876_322_541_518,
        0.140_653_259_715_525_918_745_189_590_510_238,
        0.169_004_726_639_267_902_826_583_426_598_550,
        0.190_350_578_064_785_409_913_256_402_421_014,
        0.204_432_940_075_298_892_414_161_999_234_649,
        0.209_482_141_084_727_828_012_999_174_891_714,
    ],
    wg: &[
        0.129_484_966_168_869_693_270_611_432_679_082,
        0.279_705_391_489_276_667_901_467_771_423_780,
        0.381_830_050_505_118_944_950_369_775_488_975,
        0.417_959_183_673_469_387_755_102_040_816_327,
    ],
};

/// Node on [-1, 1] with its Kronrod weight and (if a Gauss node) Gauss weight.
#[derive(Debug, Clone, Copy)]
pub struct RuleNode {
    pub x: f64,
    pub wk: f64,
    pub wg: f64,
}

impl GaussKronrod {
    /// All nodes in increasing order.
    pub fn nodes(&self) -> Vec<RuleNode> {
        let n = self.xk.len();
        let gauss_weight = |i: usize| if i % 2 == 1 { self.wg[i / 2] } else { 0.0 };
        let center = RuleNode {
            x: 0.0,
            wk: self.wk[n - 1],
            // the center is a Gauss node only when the Gauss rule has odd order
            wg: if (n - 1) % 2 == 1 { self.wg[self.wg.len() - 1] } else { 0.0 },
        };
        let mut out = Vec::with_capacity(2 * n - 1);
        for i in 0..n - 1 {
            out.push(RuleNode { x: -self.xk[i], wk: self.wk[i], wg: gauss_weight(i) });
        }
        out.push(center);
        for i in (0..n - 1).rev() {
            out.push(RuleNode { x: self.xk[i], wk: self.wk[i], wg: gauss_weight(i) });
        }
        out
    }
}

/// Cached node list of [`GK21`].
pub fn gk21_nodes() -> &'static [RuleNode] {
    static NODES: OnceLock<Vec<RuleNode>> = OnceLock::new();
    NODES.get_or_init(|| GK21.nodes())
}

/// Cached node list of [`GK15`].
pub fn gk15_nodes() -> &'static [RuleNode] {
    static NODES: OnceLock<Vec<RuleNode>> = OnceLock::new();
    NODES.get_or_init(|| GK15.nodes())
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
