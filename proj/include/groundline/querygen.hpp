#pragma once

#include "groundline/core.hpp"
#include "groundline/gateway.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace groundline {

// The original query plus its rephrasings, kept verbatim for audit.
struct DebiasedQuerySet {
  Query original;
  std::vector<std::string> rephrasings;

  std::size_t n_q() const { return rephrasings.size(); }
};

struct DebiasOptions {
  std::string model_id = "baichuan2-7b-chat";
  std::size_t n_q = 5;
  double temperature = 0.2;
};

// Single user message carrying all three rewrite instructions plus a
// numbered-list output directive. `strict` appends a harder format reminder
// and is used for the one re-prompt after a parse failure (the reminder also
// gives the retry its own cache identity).
ChatRequest build_debias_prompt(const Query& original, const DebiasOptions& options,
                                bool strict = false);

// Extract exactly n_q numbered-list items, stripping numbering, quotes and
// whitespace. Throws ParseError when fewer than n_q usable items are found.
std::vector<std::string> parse_rephrasings(const std::string& response, std::size_t n_q);

// Total function: one provider call, one strict re-prompt on parse failure,
// then degrade to n_q copies of the original with a warning. Transport
// failures still propagate.
DebiasedQuerySet debias(const Query& original, ChatProvider& provider,
                        const DebiasOptions& options);

// JSONL exchange format: {"qid": ..., "original": ..., "rephrasings": [...]}.
// Also the import format for externally produced debiased queries.
void save_debiased_jsonl(const std::filesystem::path& path,
                         const std::vector<DebiasedQuerySet>& sets);
std::vector<DebiasedQuerySet> load_debiased_jsonl(const std::filesystem::path& path);

}  // namespace groundline
