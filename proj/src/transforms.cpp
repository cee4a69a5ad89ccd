#include "markinspect/transforms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace markinspect {

namespace {

    // Row k of the basis matrix is the k-th orthonormal DCT-II basis vector:
    // C[k][m] = alpha(k) * cos(pi * (2m + 1) * k / (2n)).
    struct DctBasis {
        int n = 0;
        std::vector<double> c; // n*n, row-major
        double at(int k, int m) const { return c[static_cast<size_t>(k) * n + m]; }
    };

    DctBasis make_basis(int n)
    {
        DctBasis b;
        b.n = n;
        b.c.resize(static_cast<size_t>(n) * n);
        const double a0 = std::sqrt(1.0 / n);
        const double ak = std::sqrt(2.0 / n);
        for (int k = 0; k < n; ++k)
            for (int m = 0; m < n; ++m)
                b.c[static_cast<size_t>(k) * n + m] = (k == 0 ? a0 : ak)
                    * std::cos(std::numbers::pi * (2.0 * m + 1.0) * k / (2.0 * n));
        return b;
    }

    const DctBasis& basis(int n)
    {
        static std::mutex mu;
        static std::map<int, DctBasis> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end())
            it = cache.emplace(n, make_basis(n)).first;
        return it->second;
    }

    // out = C * in * C^T when forward, C^T * in * C when inverse
    void dct2_apply(const double* in, double* out, int n, bool forward)
    {
        const DctBasis& b = basis(n);
        std::vector<double> tmp(static_cast<size_t>(n) * n);
        // rows: tmp = in * C^T (forward) or in * C (inverse)
        for (int y = 0; y < n; ++y) {
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int m = 0; m < n; ++m)
                    acc += in[static_cast<size_t>(y) * n + m]
                        * (forward ? b.at(k, m) : b.at(m, k));
                tmp[static_cast<size_t>(y) * n + k] = acc;
            }
        }
        // cols
        for (int k = 0; k < n; ++k) {
            for (int x = 0; x < n; ++x) {
                double acc = 0.0;
                for (int m = 0; m < n; ++m)
                    acc += (forward ? b.at(k, m) : b.at(m, k))
                        * tmp[static_cast<size_t>(m) * n + x];
                out[static_cast<size_t>(k) * n + x] = acc;
            }
        }
    }

    void check_square_block(const Plane& p, bool restrict_sizes)
    {
        if (p.empty())
            raise(Errc::BadBlockSize, "empty block");
        if (p.width != p.height)
            raise(Errc::BadBlockSize, "block must be square");
        if (restrict_sizes && p.width != 4 && p.width != 8)
            raise(Errc::BadBlockSize, "block size must be 4 or 8");
    }

} // namespace

SubbandSet haar_dwt2_forward(const Plane& plane)
{
    if (plane.empty())
        raise(Errc::EmptyPlane, "cannot transform empty plane");
    if (plane.width % 2 != 0 || plane.height % 2 != 0)
        raise(Errc::DimensionMismatch, "Haar DWT requires even dimensions");

    const int sw = plane.width / 2;
    const int sh = plane.height / 2;
    SubbandSet s { Plane(sw, sh), Plane(sw, sh), Plane(sw, sh), Plane(sw, sh) };
    for (int y = 0; y < sh; ++y) {
        for (int x = 0; x < sw; ++x) {
            const double a = plane.at(2 * y, 2 * x);
            const double b = plane.at(2 * y, 2 * x + 1);
            const double c = plane.at(2 * y + 1, 2 * x);
            const double d = plane.at(2 * y + 1, 2 * x + 1);
            s.ll.at(y, x) = (a + b + c + d) / 2.0;
            s.lh.at(y, x) = (a - b + c - d) / 2.0;
            s.hl.at(y, x) = (a + b - c - d) / 2.0;
            s.hh.at(y, x) = (a - b - c + d) / 2.0;
        }
    }
    return s;
}

Plane haar_dwt2_inverse(const SubbandSet& s)
{
    const int sw = s.ll.width;
    const int sh = s.ll.height;
    auto same = [&](const Plane& p) { return p.width == sw && p.height == sh; };
    if (!same(s.lh) || !same(s.hl) || !same(s.hh))
        raise(Errc::DimensionMismatch, "subband dimensions differ");
    if (sw == 0 || sh == 0)
        raise(Errc::EmptyPlane, "empty subbands");

    Plane out(sw * 2, sh * 2);
    for (int y = 0; y < sh; ++y) {
        for (int x = 0; x < sw; ++x) {
            const double ll = s.ll.at(y, x);
            const double lh = s.lh.at(y, x);
            const double hl = s.hl.at(y, x);
            const double hh = s.hh.at(y, x);
            out.at(2 * y, 2 * x) = (ll + lh + hl + hh) / 2.0;
            out.at(2 * y, 2 * x + 1) = (ll - lh + hl - hh) / 2.0;
            out.at(2 * y + 1, 2 * x) = (ll + lh - hl - hh) / 2.0;
            out.at(2 * y + 1, 2 * x + 1) = (ll - lh - hl + hh) / 2.0;
        }
    }
    return out;
}

EvenCrop crop_even(const Plane& plane)
{
    if (plane.empty())
        raise(Errc::EmptyPlane, "cannot crop empty plane");
    EvenCrop out;
    out.margin_right = plane.width % 2;
    out.margin_bottom = plane.height % 2;
    const int w = plane.width - out.margin_right;
    const int h = plane.height - out.margin_bottom;
    if (w == 0 || h == 0)
        raise(Errc::EmptyPlane, "plane too small for even crop");
    out.plane = Plane(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.plane.at(y, x) = plane.at(y, x);
    return out;
}

Plane restore_margin(const Plane& interior, const Plane& original)
{
    if (interior.width > original.width || interior.height > original.height)
        raise(Errc::DimensionMismatch, "interior larger than original");
    Plane out = original;
    for (int y = 0; y < interior.height; ++y)
        for (int x = 0; x < interior.width; ++x)
            out.at(y, x) = interior.at(y, x);
    return out;
}

Plane dct2_block_forward(const Plane& block)
{
    check_square_block(block, true);
    Plane out(block.width, block.height);
    dct2_apply(block.v.data(), out.v.data(), block.width, true);
    return out;
}

Plane dct2_block_inverse(const Plane& coeffs)
{
    check_square_block(coeffs, true);
    Plane out(coeffs.width, coeffs.height);
    dct2_apply(coeffs.v.data(), out.v.data(), coeffs.width, false);
    return out;
}

Plane dct2_square_forward(const Plane& block)
{
    check_square_block(block, false);
    Plane out(block.width, block.height);
    dct2_apply(block.v.data(), out.v.data(), block.width, true);
    return out;
}

void dct2_forward_raw(const double* in, double* out, int n)
{
    dct2_apply(in, out, n, true);
}

void dct2_inverse_raw(const double* in, double* out, int n)
{
    dct2_apply(in, out, n, false);
}

double plane_energy(const Plane& p)
{
    double e = 0.0;
    for (double x : p.v)
        e += x * x;
    return e;
}

} // namespace markinspect
