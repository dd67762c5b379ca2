#include "groundline/similarity.hpp"

#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace groundline {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("cosine: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw ZeroVector("cosine: zero-norm input");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  return cosine(a.values, b.values);
}

SimilarityMatrix build_similarity(const DebiasedQuerySet& queries, const CaptionTrack& track,
                                  EmbedProvider& embedder, const std::string& model_id) {
  if (track.captions.empty()) throw std::invalid_argument("build_similarity: empty track");
  const std::size_t n_q = queries.n_q();
  const std::size_t n_v = track.captions.size();

  // One batched call covers both rephrasings and captions; the replay cache
  // keys on individual texts, so each distinct text costs one embedding.
  std::vector<std::string> texts;
  texts.reserve(n_q + n_v);
  texts.insert(texts.end(), queries.rephrasings.begin(), queries.rephrasings.end());
  texts.insert(texts.end(), track.captions.begin(), track.captions.end());
  const auto vectors = embedder.embed(texts, model_id);
  if (vectors.size() != texts.size())
    throw ProviderError("embedder returned wrong vector count");

  std::vector<double> values(n_q * n_v);
  for (std::size_t i = 0; i < n_q; ++i)
    for (std::size_t j = 0; j < n_v; ++j)
      values[i * n_v + j] = cosine(vectors[i], vectors[n_q + j]);

  std::vector<std::string> query_ids;
  query_ids.reserve(n_q);
  for (std::size_t i = 0; i < n_q; ++i)
    query_ids.push_back(queries.original.query_id + "#" + std::to_string(i));
  return SimilarityMatrix(std::move(values), n_q, n_v, std::move(query_ids), track.timeline);
}

namespace {

constexpr char kMagic[4] = {'G', 'L', 'S', 'M'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const SimilarityMatrix& matrix) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(matrix.n_q));
  put_u32(out, static_cast<std::uint32_t>(matrix.n_v));
  for (double v : matrix.values) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }
  atomic_write_file(path, out);
}

MatrixFile load_matrix(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < 14 || std::memcmp(data.data(), kMagic, 4) != 0)
    throw SchemaError("not a GLSM matrix file: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  MatrixFile file;
  file.version = get_u16(p + 4);
  if (file.version != 1)
    throw SchemaError("unsupported GLSM version " + std::to_string(file.version) + " in " +
                      path.string());
  file.n_q = get_u32(p + 6);
  file.n_v = get_u32(p + 10);
  const std::size_t expected = 14 + 4ull * file.n_q * file.n_v;
  if (data.size() != expected)
    throw SchemaError("GLSM payload size mismatch in " + path.string());
  file.values.reserve(static_cast<std::size_t>(file.n_q) * file.n_v);
  for (std::size_t i = 0; i < static_cast<std::size_t>(file.n_q) * file.n_v; ++i) {
    const std::uint32_t bits = get_u32(p + 14 + 4 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    file.values.push_back(f);
  }
  return file;
}

SimilarityMatrix matrix_from_file(const MatrixFile& file, const std::string& video_id, double fps,
                                  const std::string& qid) {
  std::vector<std::string> refs;
  refs.reserve(file.n_v);
  for (std::uint32_t j = 0; j < file.n_v; ++j)
    refs.push_back(video_id + "#" + std::to_string(j));
  std::vector<std::string> query_ids;
  for (std::uint32_t i = 0; i < file.n_q; ++i)
    query_ids.push_back(qid + "#" + std::to_string(i));
  const double duration = static_cast<double>(file.n_v) / fps;
  std::vector<double> values(file.values.begin(), file.values.end());
  return SimilarityMatrix(std::move(values), file.n_q, file.n_v, std::move(query_ids),
                          FrameTimeline(video_id, fps, duration, std::move(refs)));
}

}  // namespace groundline
