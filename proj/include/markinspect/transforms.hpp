#pragma once

#include "markinspect/image.hpp"

namespace markinspect {

// One level of the orthonormal 2D Haar analysis. Each 2x2 input block
// (a b; c d) maps to ll=(a+b+c+d)/2 with lh/hl/hh the signed combinations /2,
// so coefficient energy equals sample energy.
struct SubbandSet {
    Plane ll, lh, hl, hh;

    int subband_width() const { return ll.width; }
    int subband_height() const { return ll.height; }
};

// Requires even dimensions; callers crop an odd trailing row/column first
// (see crop_even) and reattach it untouched after synthesis.
SubbandSet haar_dwt2_forward(const Plane& plane);
Plane haar_dwt2_inverse(const SubbandSet& subbands);

struct EvenCrop {
    Plane plane;      // even-dimension interior
    int margin_right; // 0 or 1 cropped columns
    int margin_bottom;
};

EvenCrop crop_even(const Plane& plane);
// Reattaches the cropped margin from the original plane.
Plane restore_margin(const Plane& interior, const Plane& original);

// Orthonormal 2D DCT-II on an NxN block, N in {4, 8}; DC at (0,0).
Plane dct2_block_forward(const Plane& block);
Plane dct2_block_inverse(const Plane& coeffs);

// Unrestricted square sizes for internal consumers (perceptual hash).
Plane dct2_square_forward(const Plane& block);

// Raw in-place friendly kernels over contiguous n*n spans.
void dct2_forward_raw(const double* in, double* out, int n);
void dct2_inverse_raw(const double* in, double* out, int n);

double plane_energy(const Plane& p);

} // namespace markinspect
