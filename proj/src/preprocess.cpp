#include "preprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace cvt {

Frame rotate_to_horizontal(const Frame& frame, EnvKind kind) {
  if (kind == EnvKind::MiniPong) return frame;
  Frame out;
  for (int y = 0; y < kFrameSize; ++y)
    for (int x = 0; x < kFrameSize; ++x)
      out.at(y, kFrameSize - 1 - x) = frame.at(x, y);
  return out;
}

Frame binarize_median_subtract(const Frame& frame) {
  std::array<double, kFramePixels> sorted = frame.pixels;
  std::nth_element(sorted.begin(), sorted.begin() + (kFramePixels - 1) / 2, sorted.end());
  double median = sorted[(kFramePixels - 1) / 2];
  Frame out;
  for (int i = 0; i < kFramePixels; ++i)
    out.pixels[i] = frame.pixels[i] - median > 0.0 ? 1.0 : 0.0;
  return out;
}

Frame dilate(const Frame& frame) {
  for (double v : frame.pixels)
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("dilate: input is not binary");
  Frame out;
  for (int y = 0; y < kFrameSize; ++y) {
    for (int x = 0; x < kFrameSize; ++x) {
      double v = 0.0;
      for (int dy = -1; dy <= 1 && v == 0.0; ++dy) {
        int ny = y + dy;
        if (ny < 0 || ny >= kFrameSize) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          int nx = x + dx;
          if (nx < 0 || nx >= kFrameSize) continue;
          if (frame.at(nx, ny) == 1.0) {
            v = 1.0;
            break;
          }
        }
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

Frame box_blur(const Frame& frame) {
  Frame out;
  for (int y = 0; y < kFrameSize; ++y) {
    for (int x = 0; x < kFrameSize; ++x) {
      double sum = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        int ny = y + dy;
        if (ny < 0 || ny >= kFrameSize) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          int nx = x + dx;
          if (nx < 0 || nx >= kFrameSize) continue;
          sum += frame.at(nx, ny);
        }
      }
      out.at(x, y) = sum / 9.0;
    }
  }
  return out;
}

PreprocessedFrame attention_preprocess(const Frame& frame, EnvKind kind) {
  Frame mask = dilate(binarize_median_subtract(rotate_to_horizontal(frame, kind)));
  Frame blur1 = box_blur(mask);
  Frame blur2 = box_blur(blur1);
  PreprocessedFrame out;
  for (int i = 0; i < kFramePixels; ++i) {
    out.values[i] = mask.pixels[i];
    out.values[kFramePixels + i] = blur1.pixels[i];
    out.values[2 * kFramePixels + i] = blur2.pixels[i];
  }
  return out;
}

}  // namespace cvt
