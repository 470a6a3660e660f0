#pragma once

#include <ostream>
#include <string>

#include "sortref/dataset.hpp"

namespace sortref {

enum class ImageFormat { Pgm, Svg };

struct RenderOptions {
  ImageFormat format = ImageFormat::Pgm;
  bool log_scale = false;  // band height log2(multiplicity)+1 instead of
                           // multiplicity
  int cell_width = 1;      // horizontal pixels per property column
  int max_band_height = 1 << 20;
};

// Signature-grouped matrix raster in canonical signature order: one band
// per signature, black where the property is present, white where absent.
void render_view(const StructureView& view, const RenderOptions& opts,
                 std::ostream& out);

int band_height(std::uint64_t multiplicity, const RenderOptions& opts);

std::string format_extension(ImageFormat format);  // "pgm" or "svg"

}  // namespace sortref
