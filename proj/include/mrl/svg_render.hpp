#pragma once

#include <string>

#include "mrl/scene.hpp"

namespace mrl {

enum class ViewKind { top, camera };
ViewKind view_from_name(const std::string& name);

// Deterministic SVG: entity boxes filled on a red-to-green ramp by overlay
// rating, elements as outlined billboarded rectangles, a user pose glyph.
// top = orthographic x/z plan view; camera = pinhole view from the eye.
std::string render_svg(const Scene& scene, const Layout& layout, ViewKind view);

}  // namespace mrl
