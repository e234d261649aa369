#include "fingermi/eegf.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace fingermi {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kNameBytes = 8;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void name(const std::string& s) {
    if (s.size() > kNameBytes) {
      throw FormatError(FormatErrorKind::InvalidName, "channel name '" + s + "' exceeds 8 bytes");
    }
    for (char ch : s) {
      if (static_cast<unsigned char>(ch) < 0x21 || static_cast<unsigned char>(ch) > 0x7e) {
        throw FormatError(FormatErrorKind::InvalidName, "channel name '" + s + "' is not printable ASCII");
      }
    }
    bytes(s.data(), s.size());
    for (std::size_t i = s.size(); i < kNameBytes; ++i) buf_.push_back(' ');
  }
  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + path.string());
  }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  std::size_t size() const { return buf_.size(); }
  void need(std::uint64_t n) const {
    if (pos_ + n > buf_.size()) {
      throw FormatError(FormatErrorKind::Truncated,
                        path_ + ": truncated (need " + std::to_string(pos_ + n) + " bytes, have " +
                            std::to_string(buf_.size()) + ")");
    }
  }
  void magic(const char* m) {
    need(4);
    if (std::memcmp(buf_.data(), m, 4) != 0) {
      throw FormatError(FormatErrorKind::BadMagic, path_ + ": bad magic, expected " + std::string(m, 4));
    }
    pos_ += 4;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  std::string name() {
    need(kNameBytes);
    std::string s(buf_.data() + pos_, kNameBytes);
    pos_ += kNameBytes;
    s.erase(s.find_last_not_of(' ') + 1);
    return s;
  }
  void expect_total(std::uint64_t total) const {
    if (buf_.size() < total) {
      throw FormatError(FormatErrorKind::Truncated, path_ + ": truncated (header declares " +
                                                        std::to_string(total) + " bytes, file has " +
                                                        std::to_string(buf_.size()) + ")");
    }
    if (buf_.size() > total) {
      throw FormatError(FormatErrorKind::SizeMismatch, path_ + ": " + std::to_string(buf_.size() - total) +
                                                           " trailing bytes after declared payload");
    }
  }
  void version() {
    const auto v = u32();
    if (v != kVersion) {
      throw FormatError(FormatErrorKind::BadVersion, path_ + ": unsupported version " + std::to_string(v));
    }
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw FormatError(FormatErrorKind::SizeMismatch, std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_eegf(const EpochedDataset& d, const std::filesystem::path& path) {
  d.validate();
  Writer w;
  w.bytes("EEGF", 4);
  w.u32(kVersion);
  w.f32(d.fs);
  w.u32(checked_u32(d.n_trials(), "n_epochs"));
  w.u32(checked_u32(d.n_channels(), "n_channels"));
  w.u32(checked_u32(d.n_samples, "n_samples"));
  for (const auto& n : d.channel_names) w.name(n);
  for (auto l : d.labels) w.u8(l);
  for (double v : d.epochs) w.f32(v);
  w.save(path);
}

EpochedDataset read_eegf(const std::filesystem::path& path) {
  Reader r(path);
  r.magic("EEGF");
  r.version();
  EpochedDataset d;
  d.fs = r.f32();
  const std::uint64_t n_epochs = r.u32();
  const std::uint64_t n_channels = r.u32();
  const std::uint64_t n_samples = r.u32();
  r.expect_total(24 + n_channels * kNameBytes + n_epochs + 4 * n_epochs * n_channels * n_samples);
  d.n_samples = n_samples;
  for (std::uint64_t c = 0; c < n_channels; ++c) d.channel_names.push_back(r.name());
  for (std::uint64_t e = 0; e < n_epochs; ++e) {
    const auto l = r.u8();
    if (l >= kNumClasses) {
      throw FormatError(FormatErrorKind::InvalidLabel,
                        r.path() + ": epoch " + std::to_string(e) + " has label " + std::to_string(l));
    }
    d.labels.push_back(l);
  }
  d.epochs.resize(n_epochs * n_channels * n_samples);
  for (auto& v : d.epochs) v = r.f32();
  return d;
}

void write_eegr(const Recording& rec, const std::filesystem::path& path) {
  rec.validate();
  Writer w;
  w.bytes("EEGR", 4);
  w.u32(kVersion);
  w.f32(rec.fs);
  w.u32(checked_u32(rec.n_channels(), "n_channels"));
  w.u32(checked_u32(rec.n_samples, "n_samples"));
  w.u32(checked_u32(rec.events.size(), "n_events"));
  for (const auto& n : rec.channel_names) w.name(n);
  for (const auto& e : rec.events) {
    w.u32(checked_u32(e.sample, "event sample"));
    w.u8(e.label);
  }
  for (double v : rec.data) w.f32(v);
  w.save(path);
}

Recording read_eegr(const std::filesystem::path& path) {
  Reader r(path);
  r.magic("EEGR");
  r.version();
  Recording rec;
  rec.fs = r.f32();
  const std::uint64_t n_channels = r.u32();
  const std::uint64_t n_samples = r.u32();
  const std::uint64_t n_events = r.u32();
  r.expect_total(24 + n_channels * kNameBytes + 5 * n_events + 4 * n_channels * n_samples);
  rec.n_samples = n_samples;
  for (std::uint64_t c = 0; c < n_channels; ++c) rec.channel_names.push_back(r.name());
  for (std::uint64_t e = 0; e < n_events; ++e) {
    Event ev;
    ev.sample = r.u32();
    ev.label = r.u8();
    if (ev.label >= kNumClasses) {
      throw FormatError(FormatErrorKind::InvalidLabel,
                        r.path() + ": event " + std::to_string(e) + " has label " + std::to_string(ev.label));
    }
    rec.events.push_back(ev);
  }
  rec.data.resize(n_channels * n_samples);
  for (auto& v : rec.data) v = r.f32();
  rec.validate();
  return rec;
}

}  // namespace fingermi
