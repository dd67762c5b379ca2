#include "groundline/querygen.hpp"

#include "groundline/errors.hpp"
#include "groundline/jsonl.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace groundline {

namespace {

// Number words read better in the instruction than bare digits.
std::string spelled_count(std::size_t n) {
  static const char* words[] = {"zero", "one", "two",   "three", "four", "five",
                                "six",  "seven", "eight", "nine",  "ten"};
  if (n <= 10) return words[n];
  return std::to_string(n);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_quotes(std::string s) {
  auto matched = [&](char open, char close) {
    return s.size() >= 2 && s.front() == open && s.back() == close;
  };
  while (matched('"', '"') || matched('\'', '\'') || matched('`', '`'))
    s = trim(s.substr(1, s.size() - 2));
  return s;
}

}  // namespace

ChatRequest build_debias_prompt(const Query& original, const DebiasOptions& options,
                                bool strict) {
  if (options.n_q < 1) throw std::invalid_argument("build_debias_prompt: n_q must be >= 1");
  const std::string count = spelled_count(options.n_q);
  const std::string noun = options.n_q == 1 ? "rephrasing" : "different rephrasings";

  std::string text;
  text += "Please correct spelling and grammatical errors in the original query. ";
  text += "Please rephrase the corrected query using different wording while maintaining "
          "the same intent and information. ";
  text += "Provide " + count + " " + noun + ".\n\n";
  text += "Original query: \"" + original.text + "\"\n\n";
  text += "Reply with a numbered list from 1. to " + std::to_string(options.n_q) +
          ". with one rephrasing per line.";
  if (strict)
    text += " Output only the numbered list, nothing else.";

  ChatRequest req;
  req.model_id = options.model_id;
  req.temperature = options.temperature;
  req.messages.push_back(ChatMessage{"user", std::move(text), std::nullopt});
  return req;
}

std::vector<std::string> parse_rephrasings(const std::string& response, std::size_t n_q) {
  if (response.empty()) throw ParseError("empty debias response");
  static const std::regex item_pattern("^\\s*([0-9]+)\\s*[.):\\-]\\s*(.+)$");

  std::vector<std::string> items;
  std::istringstream in(response);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch match;
    if (!std::regex_match(line, match, item_pattern)) continue;
    const std::string item = strip_quotes(trim(match[2].str()));
    if (!item.empty()) items.push_back(item);
  }
  if (items.size() < n_q)
    throw ParseError("expected " + std::to_string(n_q) + " rephrasings, found " +
                     std::to_string(items.size()));
  if (items.size() > n_q) {
    // Over-supply: keep byte-distinct items first, then pad from the raw list.
    std::vector<std::string> distinct;
    for (const auto& item : items)
      if (std::find(distinct.begin(), distinct.end(), item) == distinct.end())
        distinct.push_back(item);
    auto& source = distinct.size() >= n_q ? distinct : items;
    source.resize(n_q);
    return source;
  }
  return items;
}

DebiasedQuerySet debias(const Query& original, ChatProvider& provider,
                        const DebiasOptions& options) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto request = build_debias_prompt(original, options, /*strict=*/attempt > 0);
    const std::string response = provider.chat(request);
    try {
      return DebiasedQuerySet{original, parse_rephrasings(response, options.n_q)};
    } catch (const ParseError&) {
      // fall through to the strict re-prompt, then to the identity fallback
    }
  }
  warn("debias parse failed twice for query '" + original.query_id +
       "', falling back to the original text");
  return DebiasedQuerySet{original,
                          std::vector<std::string>(options.n_q, original.text)};
}

void save_debiased_jsonl(const std::filesystem::path& path,
                         const std::vector<DebiasedQuerySet>& sets) {
  std::vector<json> records;
  records.reserve(sets.size());
  for (const auto& s : sets)
    records.push_back(json{{"qid", s.original.query_id},
                           {"original", s.original.text},
                           {"rephrasings", s.rephrasings}});
  atomic_write_file(path, to_jsonl(records));
}

std::vector<DebiasedQuerySet> load_debiased_jsonl(const std::filesystem::path& path) {
  std::vector<DebiasedQuerySet> out;
  std::size_t lineno = 0;
  for (const auto& record : read_jsonl(path)) {
    ++lineno;
    if (!record.contains("qid") || !record.contains("original") ||
        !record.contains("rephrasings") || !record["rephrasings"].is_array())
      throw SchemaError("debiased-query record needs qid/original/rephrasings in " +
                            path.string(),
                        lineno);
    DebiasedQuerySet set;
    const auto& qid = record["qid"];
    set.original = Query(qid.is_string() ? qid.get<std::string>() : qid.dump(),
                         record["original"].get<std::string>());
    for (const auto& r : record["rephrasings"]) {
      if (!r.is_string() || r.get<std::string>().empty())
        throw SchemaError("rephrasings must be non-empty strings in " + path.string(), lineno);
      set.rephrasings.push_back(r.get<std::string>());
    }
    if (set.rephrasings.empty())
      throw SchemaError("record has no rephrasings in " + path.string(), lineno);
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace groundline
