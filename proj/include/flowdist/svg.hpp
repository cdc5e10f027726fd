#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowdist/dist_stats.hpp"
#include "flowdist/embed.hpp"
#include "flowdist/metrics.hpp"

namespace flowdist {

enum class LogAxis : std::uint8_t { off, on, automatic };

// Step-path vertices of an ECDF: one (support value, cumulative mass) pair
// per distinct sample value. SVG paths are built from these.
std::vector<std::pair<double, double>> ecdf_step_points(const EmpiricalDistribution& dist);

// shade for a dataset marker: synthetic datasets red, real-world blue
std::string dataset_color(DatasetKind kind, std::size_t index_within_kind);

// Heatmap with every cell annotated with its value at 2 decimals.
std::string render_heatmap(const DistanceMatrix& matrix);

// Reference scatter; the reference datasets sit on the axes and every point
// carries its coordinate annotation at 2 decimals.
std::string render_scatter(const ScatterCoordinates& scatter);

struct EcdfSeries {
    std::string label;
    std::string color;
    const EmpiricalDistribution* dist = nullptr;
};

// Overlaid ECDF step curves for one feature. automatic switches to a log-10
// x-axis when the positive support spans more than three decades.
std::string render_ecdf(const std::string& title, const std::string& unit,
                        const std::vector<EcdfSeries>& series, LogAxis log_x);

struct BoxplotEntry {
    std::string label;
    std::string color;
    BoxplotSummary summary;
};

// Side-by-side boxplots: IQR box, 1.5*IQR whiskers, median circle, mean cross.
std::string render_boxplots(const std::string& title, const std::string& unit,
                            const std::vector<BoxplotEntry>& entries, LogAxis log_y);

// 2-D embedding scatter colored per dataset, with a legend.
std::string render_embedding(const EmbeddingResult& result,
                             const std::vector<std::pair<std::string, DatasetKind>>& dataset_kinds);

}  // namespace flowdist
