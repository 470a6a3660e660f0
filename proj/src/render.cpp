#include "sortref/render.hpp"

#include <algorithm>
#include <stdexcept>

namespace sortref {

int band_height(std::uint64_t multiplicity, const RenderOptions& opts) {
  if (multiplicity == 0) return 0;
  std::uint64_t h = multiplicity;
  if (opts.log_scale) {
    h = 1;
    while (multiplicity > 1) {
      multiplicity >>= 1;
      ++h;
    }
  }
  return static_cast<int>(
      std::min<std::uint64_t>(h, static_cast<std::uint64_t>(opts.max_band_height)));
}

namespace {

void render_pgm(const StructureView& view, const RenderOptions& opts,
                std::ostream& out) {
  int width = static_cast<int>(view.properties.size()) * opts.cell_width;
  long height = 0;
  for (const SignatureRow& sig : view.signatures)
    height += band_height(sig.multiplicity, opts);
  out << "P2\n" << width << ' ' << height << "\n255\n";
  for (const SignatureRow& sig : view.signatures) {
    int h = band_height(sig.multiplicity, opts);
    for (int row = 0; row < h; ++row) {
      for (std::size_t p = 0; p < sig.bits.size(); ++p) {
        int value = sig.bits[p] ? 0 : 255;
        for (int c = 0; c < opts.cell_width; ++c) {
          if (p > 0 || c > 0) out << ' ';
          out << value;
        }
      }
      out << '\n';
    }
  }
}

void render_svg(const StructureView& view, const RenderOptions& opts,
                std::ostream& out) {
  int width = static_cast<int>(view.properties.size()) * opts.cell_width;
  long height = 0;
  for (const SignatureRow& sig : view.signatures)
    height += band_height(sig.multiplicity, opts);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  long y = 0;
  for (const SignatureRow& sig : view.signatures) {
    int h = band_height(sig.multiplicity, opts);
    if (h == 0) continue;
    for (std::size_t p = 0; p < sig.bits.size(); ++p) {
      if (!sig.bits[p]) continue;
      out << "<rect x=\"" << p * opts.cell_width << "\" y=\"" << y
          << "\" width=\"" << opts.cell_width << "\" height=\"" << h
          << "\" fill=\"black\"/>\n";
    }
    y += h;
  }
  out << "</svg>\n";
}

}  // namespace

void render_view(const StructureView& view, const RenderOptions& opts,
                 std::ostream& out) {
  if (opts.cell_width < 1)
    throw std::invalid_argument("cell width must be positive");
  if (opts.format == ImageFormat::Pgm)
    render_pgm(view, opts, out);
  else
    render_svg(view, opts, out);
}

std::string format_extension(ImageFormat format) {
  return format == ImageFormat::Pgm ? "pgm" : "svg";
}

}  // namespace sortref
