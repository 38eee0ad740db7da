#pragma once

#include "envs.hpp"
#include "frame.hpp"

namespace cvt {

// Attention-map pipeline: rotate so the main axis of motion is horizontal,
// subtract the median pixel and binarize, dilate, then stack two box-blur
// levels as extra channels. All functions are pure.

// MiniPong frames are already horizontal; MiniBreakout frames are rotated
// 90 degrees counter-clockwise: (x, y) -> (y, 31 - x).
Frame rotate_to_horizontal(const Frame& frame, EnvKind kind);

// output = 1 where pixel - median(pixels) > 0, else 0. Lower median of the
// sorted pixel multiset.
Frame binarize_median_subtract(const Frame& frame);

// Morphological dilation with a 3x3 square structuring element, zero padding.
// Throws std::invalid_argument on non-binary input.
Frame dilate(const Frame& frame);

// 3x3 uniform box blur with zero padding (every neighborhood divided by 9).
Frame box_blur(const Frame& frame);

PreprocessedFrame attention_preprocess(const Frame& frame, EnvKind kind);

}  // namespace cvt
