#pragma once

#include "ctgi/gallery.hpp"

#include <span>
#include <vector>

// Gallery scoring kernels. The serial version is the reference the parallel
// one is tested against; both clamp to [-1, 1].
namespace ctgi::kernels {

std::vector<double> score_gallery_serial(std::span<const double> unit_query, const Gallery& gallery);

std::vector<double> score_gallery(std::span<const double> unit_query, const Gallery& gallery, int threads);

} // namespace ctgi::kernels
