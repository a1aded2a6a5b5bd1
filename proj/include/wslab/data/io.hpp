#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wslab/data/label_matrix.hpp"

namespace wslab::data {

/// Label matrix CSV: m comma-separated integers per row, no header. When
/// `num_classes` is absent, C is the largest vote seen (at least 2).
LabelMatrix read_label_matrix(std::istream& in, std::optional<int> num_classes = std::nullopt);
LabelMatrix load_label_matrix(const std::filesystem::path& path, std::optional<int> num_classes = std::nullopt);
void save_label_matrix(const std::filesystem::path& path, const LabelMatrix& lm);

/// Probabilistic votes as JSON nested arrays of shape [N][m][C].
LabelMatrix load_probabilistic_matrix(const std::filesystem::path& path);
LabelMatrix parse_probabilistic_matrix(const std::string& json_text);

/// Features CSV: d comma-separated decimals per row.
Matrix read_features(std::istream& in);
Matrix load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const Matrix& features);

/// Labels CSV: one integer per row.
std::vector<int> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Soft labels: C comma-separated probabilities per row.
void save_soft_labels(const std::filesystem::path& path, const Matrix& probs);

}  // namespace wslab::data
