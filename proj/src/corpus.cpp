#include "gerl/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gerl/error.hpp"

namespace gerl {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::vector<std::string> split_spaces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// Frequency-descending, then lexicographic.
std::vector<std::string> rank_by_frequency(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [token, count] : items) out.push_back(token);
  return out;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary() {
  tokens_ = {"<pad>", "<unk>"};
}

void Vocabulary::add(std::string token) {
  lookup_.emplace(token, static_cast<std::uint32_t>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& documents) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& tok : doc) ++counts[tok];
  }
  Vocabulary v;
  for (auto& tok : rank_by_frequency(counts)) v.add(std::move(tok));
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (lineno <= 2) continue;  // reserved labels
    if (line.empty()) throw ParseError(path.string(), lineno, "empty vocabulary entry");
    if (v.lookup_.contains(line)) throw ParseError(path.string(), lineno, "duplicate vocabulary entry: " + line);
    v.add(line);
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::uint32_t Vocabulary::index(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  return it == lookup_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return lookup_.contains(std::string(token)); }

// ---------------------------------------------------------------- TopicIndex

TopicIndex TopicIndex::build(const std::vector<std::string>& topics) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : topics) ++counts[t];
  TopicIndex idx;
  for (auto& name : rank_by_frequency(counts)) {
    idx.lookup_.emplace(name, static_cast<std::uint32_t>(idx.names_.size()));
    idx.names_.push_back(std::move(name));
  }
  return idx;
}

TopicIndex TopicIndex::load(const std::filesystem::path& path) {
  auto in = open_input(path);
  TopicIndex idx;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty() || idx.lookup_.contains(line)) {
      throw ParseError(path.string(), lineno, "bad topic entry '" + line + "'");
    }
    idx.lookup_.emplace(line, static_cast<std::uint32_t>(idx.names_.size()));
    idx.names_.push_back(line);
  }
  return idx;
}

void TopicIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  for (const auto& t : names_) out << t << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::uint32_t TopicIndex::index(std::string_view topic) const {
  auto it = lookup_.find(std::string(topic));
  if (it == lookup_.end()) throw std::out_of_range("unknown topic: " + std::string(topic));
  return it->second;
}

// ---------------------------------------------------------------- news

std::size_t NewsArticle::length() const {
  return static_cast<std::size_t>(std::count(title_mask.begin(), title_mask.end(), std::uint8_t{1}));
}

std::uint32_t NewsTable::find(std::string_view news_id) const {
  auto it = by_id.find(std::string(news_id));
  return it == by_id.end() ? 0 : it->second;
}

NewsTable load_news(const std::filesystem::path& path, std::size_t title_len, const Vocabulary* words,
                    const TopicIndex* topics) {
  if (title_len == 0) throw ConfigError("title length must be positive");
  struct Row {
    std::string id, topic;
    std::vector<std::string> tokens;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::unordered_map<std::string, std::size_t> seen;
  {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (next_line(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto fields = split_tabs(line);
      if (fields.size() != 3) {
        throw ParseError(path.string(), lineno, "expected 3 tab-separated fields, found " +
                                                     std::to_string(fields.size()));
      }
      if (fields[0].empty()) throw ParseError(path.string(), lineno, "empty news id");
      if (fields[1].empty()) throw ParseError(path.string(), lineno, "empty topic");
      Row row{std::string(fields[0]), std::string(fields[1]), split_spaces(fields[2]), lineno};
      if (!seen.emplace(row.id, lineno).second) {
        throw ParseError(path.string(), lineno, "duplicate news id " + row.id);
      }
      rows.push_back(std::move(row));
    }
  }

  NewsTable table;
  table.title_len = title_len;
  if (words) {
    table.words = *words;
  } else {
    std::vector<std::vector<std::string>> docs;
    docs.reserve(rows.size());
    for (const auto& r : rows) {
      docs.emplace_back(r.tokens.begin(), r.tokens.begin() + std::min(r.tokens.size(), title_len));
    }
    table.words = Vocabulary::build(docs);
  }
  if (topics) {
    table.topics = *topics;
  } else {
    std::vector<std::string> names;
    names.reserve(rows.size());
    for (const auto& r : rows) names.push_back(r.topic);
    table.topics = TopicIndex::build(names);
  }

  NewsArticle pad;
  pad.news_id = "<pad>";
  pad.title_tokens.assign(title_len, Vocabulary::kPad);
  pad.title_mask.assign(title_len, 0);
  table.articles.push_back(std::move(pad));

  for (auto& r : rows) {
    NewsArticle a;
    a.news_id = r.id;
    if (!table.topics.contains(r.topic)) {
      throw ParseError(path.string(), r.line, "unknown topic " + r.topic);
    }
    a.topic_id = table.topics.index(r.topic);
    a.title_tokens.assign(title_len, Vocabulary::kPad);
    a.title_mask.assign(title_len, 0);
    const std::size_t n = std::min(r.tokens.size(), title_len);
    for (std::size_t i = 0; i < n; ++i) {
      a.title_tokens[i] = table.words.index(r.tokens[i]);
      a.title_mask[i] = 1;
    }
    table.by_id.emplace(a.news_id, static_cast<std::uint32_t>(table.articles.size()));
    table.articles.push_back(std::move(a));
  }
  return table;
}

void write_news(const std::filesystem::path& path, const NewsTable& table) {
  std::ofstream out(path, std::ios::binary);
  for (std::size_t i = 1; i < table.articles.size(); ++i) {
    const auto& a = table.articles[i];
    out << a.news_id << '\t' << table.topics.name(a.topic_id) << '\t';
    bool first = true;
    for (std::size_t s = 0; s < a.title_tokens.size(); ++s) {
      if (!a.title_mask[s]) continue;
      if (!first) out << ' ';
      out << table.words.token(a.title_tokens[s]);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------- users

UserIndex::UserIndex() { names_.push_back("<cold>"); }

std::uint32_t UserIndex::intern(std::string_view user_id) {
  std::string key(user_id);
  auto it = lookup_.find(key);
  if (it != lookup_.end()) return it->second;
  const auto idx = static_cast<std::uint32_t>(names_.size());
  lookup_.emplace(key, idx);
  names_.push_back(std::move(key));
  return idx;
}

std::uint32_t UserIndex::find(std::string_view user_id) const {
  auto it = lookup_.find(std::string(user_id));
  return it == lookup_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------- behaviors

std::size_t Impression::positives() const {
  return static_cast<std::size_t>(
      std::count_if(candidates.begin(), candidates.end(), [](const Candidate& c) { return c.label == 1; }));
}

std::int64_t parse_timestamp(std::string_view text) {
  std::int64_t epoch = 0;
  if (parse_int(text, epoch)) return epoch;

  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  const std::string str(text);
  int consumed = 0;
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 || consumed != 10) {
    throw std::invalid_argument("unrecognised timestamp '" + str + "'");
  }
  std::string_view rest = text.substr(10);
  if (!rest.empty()) {
    if (rest[0] != 'T' && rest[0] != ' ') throw std::invalid_argument("unrecognised timestamp '" + str + "'");
    int used = 0;
    const std::string tail(rest.substr(1));
    if (std::sscanf(tail.c_str(), "%2d:%2d:%2d%n", &h, &mi, &s, &used) != 3 || used != 8) {
      throw std::invalid_argument("unrecognised timestamp '" + str + "'");
    }
    const std::string_view zone = rest.substr(1 + 8);
    if (!(zone.empty() || zone == "Z")) throw std::invalid_argument("unsupported timezone in '" + str + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw std::invalid_argument("invalid date in '" + str + "'");
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

BehaviorLog load_behaviors(const std::filesystem::path& path, const NewsTable& news, std::size_t history_len) {
  BehaviorLog log;
  auto in = open_input(path);
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw ParseError(path.string(), lineno, "expected 5 tab-separated fields, found " +
                                                  std::to_string(fields.size()));
    }
    Impression imp;
    imp.impression_id = std::string(fields[0]);
    if (fields[1].empty()) throw ParseError(path.string(), lineno, "empty user id");
    imp.user = log.users.intern(fields[1]);
    try {
      imp.timestamp = parse_timestamp(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    for (const auto& id : split_spaces(fields[3])) {
      const auto idx = news.find(id);
      if (idx == 0) {
        ++log.dropped_history;
        continue;
      }
      imp.history.push_back(idx);
    }
    if (history_len > 0 && imp.history.size() > history_len) {
      imp.history.erase(imp.history.begin(), imp.history.end() - static_cast<std::ptrdiff_t>(history_len));
    }
    for (const auto& pair : split_spaces(fields[4])) {
      const auto dash = pair.rfind('-');
      if (dash == std::string::npos || dash == 0) {
        throw ParseError(path.string(), lineno, "candidate '" + pair + "' is not newsid-label");
      }
      const std::string label = pair.substr(dash + 1);
      if (label != "0" && label != "1") {
        throw ParseError(path.string(), lineno, "label must be 0 or 1 in '" + pair + "'");
      }
      const auto idx = news.find(std::string_view(pair).substr(0, dash));
      if (idx == 0) throw ParseError(path.string(), lineno, "unknown candidate news " + pair.substr(0, dash));
      imp.candidates.push_back({idx, static_cast<std::uint8_t>(label == "1")});
    }
    if (imp.candidates.empty()) throw ParseError(path.string(), lineno, "impression has no candidates");
    log.impressions.push_back(std::move(imp));
  }
  return log;
}

// ---------------------------------------------------------------- splits

Split split_by_time(const std::vector<Impression>& impressions, std::int64_t test_start, double val_fraction,
                    std::mt19937_64& rng) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  Split split;
  std::vector<std::size_t> before;
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    if (impressions[i].timestamp >= test_start) {
      split.test.push_back(impressions[i]);
    } else {
      before.push_back(i);
    }
  }
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(before.size())));
  std::vector<std::size_t> order = before;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::uint8_t> is_val(impressions.size(), 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = 1;
  for (auto i : before) (is_val[i] ? split.validation : split.train).push_back(impressions[i]);

  if (split.train.empty()) throw ConfigError("training split is empty");
  if (split.validation.empty()) throw ConfigError("validation split is empty");
  if (split.test.empty()) throw ConfigError("test split is empty (no impression at or after test start)");
  return split;
}

std::int64_t last_week_start(const std::vector<Impression>& impressions) {
  if (impressions.empty()) throw ConfigError("no impressions");
  std::int64_t latest = impressions.front().timestamp;
  for (const auto& imp : impressions) latest = std::max(latest, imp.timestamp);
  return latest - 7 * 86400 + 1;
}

// ---------------------------------------------------------------- embeddings

Tensor<double> load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                          std::size_t dim, std::mt19937_64& rng, std::size_t* rows_found) {
  Tensor<double> table({vocab.size(), dim});
  std::uniform_real_distribution<double> init(-0.1, 0.1);
  for (auto& v : table.values()) v = init(rng);
  std::size_t found = 0;
  if (!path.empty()) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (next_line(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto parts = split_spaces(line);
      if (parts.size() != dim + 1) {
        throw ParseError(path.string(), lineno, "expected token and " + std::to_string(dim) + " values, found " +
                                                    std::to_string(parts.size() - 1) + " values");
      }
      if (!vocab.contains(parts[0])) continue;
      const auto row = vocab.index(parts[0]);
      for (std::size_t c = 0; c < dim; ++c) {
        try {
          std::size_t used = 0;
          table(row, c) = std::stod(parts[c + 1], &used);
          if (used != parts[c + 1].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
          throw ParseError(path.string(), lineno, "bad value '" + parts[c + 1] + "'");
        }
      }
      ++found;
    }
  }
  for (std::size_t c = 0; c < dim; ++c) table(Vocabulary::kPad, c) = 0.0;
  if (rows_found) *rows_found = found;
  return table;
}

}  // namespace gerl
