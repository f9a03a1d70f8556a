#pragma once

#include "hyperrnn/channel/channel.hpp"

#include <string>
#include <vector>

// Frame dataset container, little-endian:
//   "HRNNFRMS" | u32 version (=1) | u64 frame count
//   per frame: u32 paths | u32 slots | f64 carrier_ul | f64 carrier_dl
//              paths x (f64 aod, f64 gain)
//              paths x (f64 rho, slots x (f64 re, f64 im))   uplink tracks
//              paths x (f64 rho, slots x (f64 re, f64 im))   downlink tracks

namespace hyperrnn::channel {

inline constexpr std::uint32_t kFrameFormatVersion = 1;

void save_frames(const std::string& path, const std::vector<MultipathFrame>& frames);
std::vector<MultipathFrame> load_frames(const std::string& path);

}  // namespace hyperrnn::channel
