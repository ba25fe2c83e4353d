//! Text checkpoints of a trained TT-RNN.
//!
//! ```text
//! ttrnn-checkpoint 1
//! seed <seed>
//! epochs <epochs>
//! tt-matrix in=... out=... ranks=...
//! <one line per core>
//! tensor input_bias <dims>
//! tensor feedback <M,M>
//! tensor head_weights <3,M>
//! tensor head_bias <3>
//! ```
//!
//! Numbers use round-trip formatting, so loading a checkpoint restores the
//! model bit for bit and equal models always produce equal files.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::neural::{TtLinearLayer, TtRnn};
use crate::textio::{write_tensor, write_tt_matrix, TextError, TextReader};

const MAGIC: &str = "ttrnn-checkpoint 1";

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    pub epochs: usize,
    pub model: TtRnn,
}

impl Checkpoint {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "seed {}", self.seed)?;
        writeln!(out, "epochs {}", self.epochs)?;
        let layer = self.model.input_layer();
        write_tt_matrix(&mut out, layer.weights())?;
        write_tensor(&mut out, "input_bias", layer.bias())?;
        write_tensor(&mut out, "feedback", self.model.feedback())?;
        write_tensor(&mut out, "head_weights", self.model.head_weights())?;
        write_tensor(&mut out, "head_bias", self.model.head_bias())?;
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, TextError> {
        let mut r = TextReader::new(input);
        let magic = r.expect_line("checkpoint header")?;
        if magic != MAGIC {
            return Err(r.syntax(format!("not a checkpoint: {magic:?}")));
        }
        let mut field = |name: &str| -> Result<String, TextError> {
            let line = r.expect_line(name)?;
            line.strip_prefix(name)
                .and_then(|v| v.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| r.syntax(format!("expected `{name} <value>`")))
        };
        let seed = field("seed")?;
        let epochs = field("epochs")?;
        let seed = seed.parse().map_err(|_| r.syntax("bad seed"))?;
        let epochs = epochs.parse().map_err(|_| r.syntax("bad epochs"))?;
        let weights = r.read_tt_matrix()?;
        let mut named = |expected: &str| {
            let (name, t) = r.read_tensor()?;
            if name != expected {
                return Err(r.syntax(format!("expected tensor {expected}, found {name}")));
            }
            Ok(t)
        };
        let bias = named("input_bias")?;
        let feedback = named("feedback")?;
        let head_weights = named("head_weights")?;
        let head_bias = named("head_bias")?;
        let build = || -> crate::neural::Result<TtRnn> {
            TtRnn::new(TtLinearLayer::new(weights, bias)?, feedback, head_weights, head_bias)
        };
        let model = build().map_err(|e| r.syntax(format!("inconsistent checkpoint: {e}")))?;
        Ok(Checkpoint { seed, epochs, model })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        std::fs::write(path, buf)
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        Checkpoint::read(BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{init_model, ModelShape};
    use crate::rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let shape = ModelShape::uniform(vec![2, 3, 2], vec![2, 2, 3], 3);
        let model = init_model(&shape, &mut rng::stream(9, "init")).unwrap();
        let ck = Checkpoint { seed: 9, epochs: 4, model };
        let mut a = Vec::new();
        ck.write(&mut a).unwrap();
        let back = Checkpoint::read(&a[..]).unwrap();
        assert_eq!(back, ck);
        let mut b = Vec::new();
        back.write(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_or_foreign_files_fail() {
        assert!(Checkpoint::read(&b"hello\n"[..]).is_err());
        let shape = ModelShape::uniform(vec![2, 2], vec![2, 2], 2);
        let ck = Checkpoint {
            seed: 0,
            epochs: 1,
            model: TtRnn::zeros(&shape).unwrap(),
        };
        let mut buf = Vec::new();
        ck.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(7).map(|l| format!("{l}\n")).collect();
        assert!(matches!(Checkpoint::read(cut.as_bytes()), Err(TextError::Eof(_))));
    }
}
