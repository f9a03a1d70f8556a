#include "hyperrnn/channel/frame_io.hpp"

#include "hyperrnn/binary_io.hpp"

#include <fstream>

namespace hyperrnn::channel {

namespace {

constexpr std::string_view kMagic = "HRNNFRMS";

void put_track(std::ostream& out, const FadingTrack& track) {
  binio::put_f64(out, track.rho);
  for (const auto& v : track.values) {
    binio::put_f64(out, v.real());
    binio::put_f64(out, v.imag());
  }
}

FadingTrack get_track(std::istream& in, int slots) {
  FadingTrack track{{}, binio::get_f64(in)};
  track.values.reserve(static_cast<std::size_t>(slots));
  for (int t = 0; t < slots; ++t) {
    const double re = binio::get_f64(in);
    const double im = binio::get_f64(in);
    track.values.emplace_back(re, im);
  }
  return track;
}

}  // namespace

void save_frames(const std::string& path, const std::vector<MultipathFrame>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write frame file " + path);
  binio::put_bytes(out, kMagic);
  binio::put_u32(out, kFrameFormatVersion);
  binio::put_u64(out, frames.size());
  for (const auto& f : frames) {
    binio::put_u32(out, static_cast<std::uint32_t>(f.paths.size()));
    binio::put_u32(out, static_cast<std::uint32_t>(f.slots));
    binio::put_f64(out, f.carrier_ul);
    binio::put_f64(out, f.carrier_dl);
    for (const auto& p : f.paths) {
      binio::put_f64(out, p.aod);
      binio::put_f64(out, p.gain);
    }
    for (const auto& t : f.uplink) put_track(out, t);
    for (const auto& t : f.downlink) put_track(out, t);
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<MultipathFrame> load_frames(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open frame file " + path);
  binio::expect_magic(in, kMagic);
  const std::uint32_t version = binio::get_u32(in);
  if (version != kFrameFormatVersion)
    throw binio::FormatError("unsupported frame file version " + std::to_string(version));
  const std::uint64_t count = binio::get_u64(in);
  std::vector<MultipathFrame> frames;
  frames.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    MultipathFrame f;
    const auto paths = static_cast<int>(binio::get_u32(in));
    f.slots = static_cast<int>(binio::get_u32(in));
    f.carrier_ul = binio::get_f64(in);
    f.carrier_dl = binio::get_f64(in);
    for (int p = 0; p < paths; ++p) {
      const double aod = binio::get_f64(in);
      const double gain = binio::get_f64(in);
      f.paths.push_back({aod, gain});
    }
    for (int p = 0; p < paths; ++p) f.uplink.push_back(get_track(in, f.slots));
    for (int p = 0; p < paths; ++p) f.downlink.push_back(get_track(in, f.slots));
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace hyperrnn::channel
