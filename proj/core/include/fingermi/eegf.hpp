#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fingermi/signal.hpp"

namespace fingermi {

enum class FormatErrorKind { Io, BadMagic, BadVersion, Truncated, SizeMismatch, InvalidLabel, InvalidName };

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FormatErrorKind kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// EEGF v1, little-endian:
///   "EEGF" | u32 version=1 | f32 fs | u32 n_epochs | u32 n_channels | u32 n_samples
///   | n_channels x 8-byte ASCII names (space padded) | n_epochs x u8 labels
///   | n_epochs*n_channels*n_samples x f32 samples (epoch-major, then channel-major)
void write_eegf(const EpochedDataset& dataset, const std::filesystem::path& path);
EpochedDataset read_eegf(const std::filesystem::path& path);

/// EEGR v1, the continuous-recording companion of EEGF, little-endian:
///   "EEGR" | u32 version=1 | f32 fs | u32 n_channels | u32 n_samples | u32 n_events
///   | n_channels x 8-byte names | n_events x (u32 sample, u8 label)
///   | n_channels*n_samples x f32 samples (channel-major)
void write_eegr(const Recording& recording, const std::filesystem::path& path);
Recording read_eegr(const std::filesystem::path& path);

}  // namespace fingermi
