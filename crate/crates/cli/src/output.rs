//! Staged output: everything is written to temporary files next to its
//! destination and renamed into place only once the whole command succeeded.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use stylekit::audio::write_wav;
use stylekit::{AudioBuffer, SampleCodec};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

#[derive(Default)]
pub struct Staged {
    files: Vec<(NamedTempFile, PathBuf)>,
}

impl Staged {
    fn temp_for(dest: &Path) -> CliResult<NamedTempFile> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir).map_err(|e| CliError::failed(format!("cannot create {}: {e}", dir.display())))?;
        NamedTempFile::new_in(dir).map_err(|e| CliError::failed(format!("cannot stage {}: {e}", dest.display())))
    }

    pub fn text(&mut self, dest: &Path, fill: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
        let tmp = Self::temp_for(dest)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            fill(&mut w)?;
            w.flush()?;
        }
        self.files.push((tmp, dest.to_path_buf()));
        Ok(())
    }

    pub fn wav(&mut self, dest: &Path, audio: &AudioBuffer, codec: SampleCodec) -> CliResult<()> {
        if codec == SampleCodec::Pcm16 && audio.peak() > 1.0 {
            return Err(CliError::failed(format!(
                "{}: output peak {:.3} exceeds PCM16 full scale; use --format float32 or lower the input level",
                dest.display(),
                audio.peak()
            )));
        }
        let tmp = Self::temp_for(dest)?;
        write_wav(audio, tmp.path(), codec).map_err(|e| CliError::failed(format!("{}: {e}", dest.display())))?;
        self.files.push((tmp, dest.to_path_buf()));
        Ok(())
    }

    /// Renames every staged file to its destination.
    pub fn commit(self) -> CliResult<()> {
        for (tmp, dest) in self.files {
            tmp.persist(&dest)
                .map_err(|e| CliError::failed(format!("cannot write {}: {}", dest.display(), e.error)))?;
        }
        Ok(())
    }
}

pub fn parse_codec(s: &str) -> CliResult<SampleCodec> {
    match s.to_ascii_lowercase().as_str() {
        "pcm16" => Ok(SampleCodec::Pcm16),
        "float32" => Ok(SampleCodec::Float32),
        _ => Err(CliError::usage(format!("unknown sample format `{s}` (pcm16 or float32)"))),
    }
}
