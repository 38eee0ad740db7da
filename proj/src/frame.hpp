#pragma once

#include <array>
#include <cstddef>

namespace cvt {

// Playfield is a fixed 32x32 grid for both games.
inline constexpr int kFrameSize = 32;
inline constexpr int kFramePixels = kFrameSize * kFrameSize;

// Pixel palette.
inline constexpr double kBackgroundPixel = 0.2;
inline constexpr double kBrickPixel = 0.6;
inline constexpr double kPaddlePixel = 0.8;
inline constexpr double kBallPixel = 1.0;

// Single-channel raw game image, row-major, intensities in [0,1].
struct Frame {
  std::array<double, kFramePixels> pixels{};

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * kFrameSize + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * kFrameSize + x]; }

  bool operator==(const Frame&) const = default;
};

// 3-channel attention-map form of a Frame: channel 0 is the
// rotated+binarized+dilated mask, channels 1 and 2 are successive box blurs.
struct PreprocessedFrame {
  std::array<double, 3 * kFramePixels> values{};

  double& at(int c, int x, int y) {
    return values[static_cast<std::size_t>(c) * kFramePixels + static_cast<std::size_t>(y) * kFrameSize + x];
  }
  double at(int c, int x, int y) const {
    return values[static_cast<std::size_t>(c) * kFramePixels + static_cast<std::size_t>(y) * kFrameSize + x];
  }

  bool operator==(const PreprocessedFrame&) const = default;
};

}  // namespace cvt
