#pragma once

#include "groundline/captioner.hpp"
#include "groundline/core.hpp"
#include "groundline/gateway.hpp"
#include "groundline/querygen.hpp"

#include <filesystem>
#include <vector>

namespace groundline {

// a.b / (|a||b|); the general formula so unnormalized inputs still work.
double cosine(const std::vector<double>& a, const std::vector<double>& b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Row i = cosine of rephrasing i against every caption, in frame order.
// Rephrasings and captions are embedded once each, in batched calls.
SimilarityMatrix build_similarity(const DebiasedQuerySet& queries, const CaptionTrack& track,
                                  EmbedProvider& embedder, const std::string& model_id);

// Raw matrix file: magic "GLSM", u16 version, u32 n_q, u32 n_v, then
// row-major float32, all little-endian.
struct MatrixFile {
  std::uint16_t version = 1;
  std::uint32_t n_q = 0;
  std::uint32_t n_v = 0;
  std::vector<float> values;
};

void save_matrix(const std::filesystem::path& path, const SimilarityMatrix& matrix);
MatrixFile load_matrix(const std::filesystem::path& path);

// Assemble a full SimilarityMatrix from a raw file plus the frame convention.
SimilarityMatrix matrix_from_file(const MatrixFile& file, const std::string& video_id, double fps,
                                  const std::string& qid);

}  // namespace groundline
