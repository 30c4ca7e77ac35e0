#include "coordfield/command_parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "coordfield/trace_io.hpp"

namespace coordfield {

std::string_view to_string(Confidence c) { return c == Confidence::exact ? "exact" : "fuzzy"; }

ParseError::ParseError(std::string clause, std::string reason)
    : std::runtime_error("cannot parse \"" + clause + "\": " + reason),
      clause_(std::move(clause)),
      reason_(std::move(reason)) {}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

std::vector<std::string> split_name(const std::string& name) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_') {
      if (!cur.empty()) words.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

}  // namespace

Lexicon load_lexicon(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("places") || !doc.at("places").is_object())
    throw ConfigError("lexicon needs a \"places\" object", "places");
  for (const auto& [key, value] : doc.items())
    if (key != "places") throw ConfigError("unknown lexicon key", key);
  Lexicon lex;
  for (const auto& [name, box] : doc.at("places").items()) {
    const std::string field = "places." + name;
    if (!box.is_array() || box.size() != 4) throw ConfigError("place box must be [x0, y0, x1, y1]", field);
    for (const auto& v : box)
      if (!v.is_number()) throw ConfigError("place box must be numeric", field);
    Lexicon::Place p{split_name(name), box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                     box[3].get<double>()};
    if (p.words.empty()) throw ConfigError("empty place name", field);
    if (p.x1 < p.x0 || p.y1 < p.y0) throw ConfigError("place box corners out of order", field);
    lex.places.push_back(std::move(p));
  }
  return lex;
}

Lexicon load_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon " + path.string(), path.string());
  try {
    return load_lexicon(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what(), path.string());
  }
}

Vec2 hotspot_centroid(const WorldMap& world, EntityKind kind) {
  std::map<std::pair<long, long>, int> bins;  // (by, bx) -> count
  const auto bin_of = [](const Entity& e) {
    return std::pair<long, long>{static_cast<long>(std::floor(e.position.y / kHotspotBin)),
                                 static_cast<long>(std::floor(e.position.x / kHotspotBin))};
  };
  for (const Entity& e : world.entities)
    if (e.kind == kind) ++bins[bin_of(e)];
  if (bins.empty()) throw std::invalid_argument("no " + std::string(to_string(kind)) + " entities");
  auto mode = bins.begin();
  for (auto it = bins.begin(); it != bins.end(); ++it)
    if (it->second > mode->second) mode = it;
  const auto [my, mx] = mode->first;
  Vec2 sum{};
  int n = 0;
  for (const Entity& e : world.entities) {
    if (e.kind != kind) continue;
    const auto [by, bx] = bin_of(e);
    if (std::abs(by - my) <= 1 && std::abs(bx - mx) <= 1) {
      sum = sum + e.position;
      ++n;
    }
  }
  return sum * (1.0 / n);
}

// ---------------------------------------------------------------------------
// Grammar

namespace {

enum class Tok : unsigned char { word, number, lparen, rparen, comma };

struct Token {
  Tok kind;
  std::string text;  // lower-cased word
  double value = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t k = 0;
  const auto at = [&](std::size_t p) { return p < s.size() ? s[p] : '\0'; };
  const auto digit = [](char c) { return c >= '0' && c <= '9'; };
  while (k < s.size()) {
    const char c = s[k];
    const auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      ++k;
    } else if (std::isalpha(uc)) {
      const std::size_t b = k;
      std::string w;
      while (std::isalpha(static_cast<unsigned char>(at(k))) || at(k) == '\'' ||
             (at(k) == '-' && std::isalpha(static_cast<unsigned char>(at(k + 1))))) {
        if (at(k) != '-') w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(at(k)))));
        ++k;
      }
      out.push_back({Tok::word, w, 0.0, b, k});
    } else if (c == '_') {
      ++k;
    } else if (digit(c) || ((c == '-' || c == '.') && digit(at(k + 1))) ||
               (c == '-' && at(k + 1) == '.' && digit(at(k + 2)))) {
      const std::size_t b = k;
      ++k;
      while (digit(at(k)) || at(k) == '.' || at(k) == 'e' || at(k) == 'E' ||
             ((at(k) == '+' || at(k) == '-') && (at(k - 1) == 'e' || at(k - 1) == 'E')))
        ++k;
      double v = 0.0;
      const auto r = std::from_chars(s.data() + b, s.data() + k, v);
      if (r.ec != std::errc{} || r.ptr != s.data() + k || !std::isfinite(v))
        throw ParseError(s, "malformed number '" + s.substr(b, k - b) + "'");
      out.push_back({Tok::number, s.substr(b, k - b), v, b, k});
    } else if (c == '(' || c == ')' || c == ',') {
      out.push_back({c == '(' ? Tok::lparen : c == ')' ? Tok::rparen : Tok::comma, std::string(1, c), 0.0, k, k + 1});
      ++k;
    } else if ((c == '.' || c == '!' || c == '?') && s.find_first_not_of(" \t\r\n.!?", k) == std::string::npos) {
      break;  // closing punctuation
    } else {
      throw ParseError(s, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

enum class VerbClass : unsigned char { patrol, track, inspect };

std::optional<VerbClass> verb_of(const std::string& w) {
  if (w == "patrol" || w == "scan") return VerbClass::patrol;
  if (w == "track" || w == "follow" || w == "monitor") return VerbClass::track;
  if (w == "inspect") return VerbClass::inspect;
  return std::nullopt;
}

std::optional<EntityKind> entity_of(const std::string& w) {
  static const std::map<std::string, EntityKind> words{
      {"crowd", EntityKind::pedestrian},    {"crowds", EntityKind::pedestrian}, {"people", EntityKind::pedestrian},
      {"pedestrian", EntityKind::pedestrian}, {"pedestrians", EntityKind::pedestrian},
      {"vehicle", EntityKind::vehicle},     {"vehicles", EntityKind::vehicle},  {"car", EntityKind::vehicle},
      {"cars", EntityKind::vehicle},        {"traffic", EntityKind::vehicle}};
  const auto it = words.find(w);
  if (it == words.end()) return std::nullopt;
  return it->second;
}

std::optional<double> level_of(const std::string& w) {
  if (w == "urgent" || w == "high") return kWeightHigh;
  if (w == "normal" || w == "default") return kWeightNormal;
  if (w == "low") return kWeightLow;
  return std::nullopt;
}

// (column, row) of a compass region on the 3x3 split; north is small y.
std::optional<std::pair<int, int>> region_of(const std::string& w) {
  static const std::map<std::string, std::pair<int, int>> regions{
      {"north", {1, 0}},     {"south", {1, 2}},     {"east", {2, 1}},      {"west", {0, 1}},
      {"northeast", {2, 0}}, {"northwest", {0, 0}}, {"southeast", {2, 2}}, {"southwest", {0, 2}},
      {"center", {1, 1}},    {"centre", {1, 1}},    {"central", {1, 1}}};
  const auto it = regions.find(w);
  if (it == regions.end()) return std::nullopt;
  return it->second;
}

bool is_preposition(const std::string& w) {
  return w == "at" || w == "near" || w == "around" || w == "in" || w == "by" || w == "over";
}

bool is_area_word(const std::string& w) {
  return w == "area" || w == "region" || w == "sector" || w == "side" || w == "district" || w == "part";
}

struct Location {
  Vec2 position;
  bool exact = false;
};

class Parser {
 public:
  Parser(const std::string& text, const WorldMap& world, const Lexicon& lexicon)
      : text_(text), toks_(tokenize(text)), world_(world), lexicon_(lexicon) {}

  ParsedCommand run() {
    if (toks_.empty()) throw ParseError(text_, "empty instruction");
    ParsedCommand out;
    if (word("please")) ++pos_;
    std::optional<VerbClass> verb;
    bool exact = true;
    while (true) {
      clause_ = pos_;
      const TaskDraft d = clause(verb, exact);
      out.tasks.push_back(d);
      if (pos_ == toks_.size()) break;
      if (!word("and")) fail("unexpected '" + toks_[pos_].text + "'");
      ++pos_;
      if (pos_ == toks_.size()) fail("nothing after 'and'");
    }
    out.confidence = exact ? Confidence::exact : Confidence::fuzzy;
    return out;
  }

 private:
  bool word(const char* w) const {
    return pos_ < toks_.size() && toks_[pos_].kind == Tok::word && toks_[pos_].text == w;
  }
  bool is(Tok k) const { return pos_ < toks_.size() && toks_[pos_].kind == k; }
  const std::string& current_word() const {
    static const std::string none;
    return pos_ < toks_.size() && toks_[pos_].kind == Tok::word ? toks_[pos_].text : none;
  }

  [[noreturn]] void fail(const std::string& reason) const {
    std::size_t last = clause_;
    for (std::size_t k = clause_; k < toks_.size(); ++k) {
      if (k > clause_ && toks_[k].kind == Tok::word && toks_[k].text == "and") break;
      last = k;
    }
    const std::size_t b = clause_ < toks_.size() ? toks_[clause_].begin : text_.size();
    const std::size_t e = clause_ < toks_.size() ? toks_[last].end : text_.size();
    throw ParseError(text_.substr(b, e - b), reason);
  }

  double number() {
    if (!is(Tok::number)) fail("expected a number");
    return toks_[pos_++].value;
  }

  void expect(Tok k, const char* what) {
    if (!is(k)) fail(std::string("expected '") + what + "'");
    ++pos_;
  }

  TaskDraft clause(std::optional<VerbClass>& verb, bool& exact) {
    if (const auto v = verb_of(current_word())) {
      verb = v;
      ++pos_;
    } else if (!verb) {
      fail(current_word().empty() ? "expected a verb" : "unknown verb '" + current_word() + "'");
    } else if (!object_ahead() && !is_preposition(current_word())) {
      // a conjunct may drop the verb when it opens with an object or a preposition
      fail(current_word().empty() ? "expected a verb or an object" : "unknown word '" + current_word() + "'");
    }

    std::optional<EntityKind> object;
    if (object_ahead()) {
      if (word("the")) ++pos_;
      object = entity_of(current_word());
      ++pos_;
    }

    std::optional<Location> loc = location();
    std::optional<double> weight;
    std::optional<double> sigma;
    while (pos_ < toks_.size() && !word("and")) {
      if (auto w = priority()) {
        if (weight) fail("priority given twice");
        weight = w;
      } else if (word("radius") || word("sigma")) {
        ++pos_;
        if (sigma) fail("radius given twice");
        sigma = number();
        if (!(*sigma > 0.0)) fail("radius must be positive");
      } else {
        fail("unknown word '" + toks_[pos_].text + "'");
      }
    }

    if (!loc) {
      if (!object) fail("missing location");
      loc = hotspot(*object);
    }
    exact = exact && loc->exact;

    TaskDraft d;
    d.position = loc->position;
    d.weight = weight.value_or(kWeightNormal);
    d.sigma = sigma.value_or(kDefaultSigma);
    switch (*verb) {
      case VerbClass::patrol: d.type = Role::patrol; break;
      case VerbClass::track: d.type = Role::tracking; break;
      case VerbClass::inspect:
        d.type = object == EntityKind::vehicle ? Role::tracking : Role::patrol;
        break;
    }
    return d;
  }

  bool object_ahead() const {
    std::size_t k = pos_;
    if (k < toks_.size() && toks_[k].kind == Tok::word && toks_[k].text == "the") ++k;
    return k < toks_.size() && toks_[k].kind == Tok::word && entity_of(toks_[k].text).has_value();
  }

  std::optional<double> priority() {
    if (word("with")) {
      ++pos_;
      const auto w = level_of(current_word());
      if (!w) fail("expected a priority level after 'with'");
      ++pos_;
      if (!word("priority")) fail("expected 'priority'");
      ++pos_;
      return w;
    }
    if (word("weight")) {
      ++pos_;
      const double w = number();
      if (w < 0.0) fail("weight must not be negative");
      return w;
    }
    if (word("priority")) {
      ++pos_;
      const auto w = level_of(current_word());
      if (!w) fail("expected a priority level after 'priority'");
      ++pos_;
      return w;
    }
    if (const auto w = level_of(current_word())) {
      ++pos_;
      if (word("priority")) ++pos_;
      return w;
    }
    return std::nullopt;
  }

  std::optional<Location> location() {
    const std::size_t start = pos_;
    const bool prep = is_preposition(current_word());
    if (prep) ++pos_;
    if (is(Tok::lparen)) {
      if (!prep || toks_[start].text != "at") fail("coordinates need 'at'");
      ++pos_;
      const double x = number();
      expect(Tok::comma, ",");
      const double y = number();
      expect(Tok::rparen, ")");
      if (x < 0.0 || y < 0.0 || x >= world_.extent_x() || y >= world_.extent_y())
        fail("position (" + format_double(x) + ", " + format_double(y) + ") is outside the map");
      if (is_obstacle(world_, {x, y}))
        fail("position (" + format_double(x) + ", " + format_double(y) + ") is inside a building");
      return Location{{x, y}, true};
    }
    if (word("the")) ++pos_;
    if (const auto p = place()) return Location{snap(p->centre()), false};
    if (const auto r = region()) return Location{snap(*r), false};
    if (prep || pos_ != start) {
      if (pos_ < toks_.size()) fail("unknown place '" + toks_[pos_].text + "'");
      fail("missing place after '" + toks_[start].text + "'");
    }
    return std::nullopt;
  }

  std::optional<Lexicon::Place> place() {
    const Lexicon::Place* best = nullptr;
    for (const auto& p : lexicon_.places) {
      if (pos_ + p.words.size() > toks_.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < p.words.size() && ok; ++k)
        ok = toks_[pos_ + k].kind == Tok::word && toks_[pos_ + k].text == p.words[k];
      if (ok && (!best || p.words.size() > best->words.size())) best = &p;
    }
    if (!best) return std::nullopt;
    pos_ += best->words.size();
    return *best;
  }

  std::optional<Vec2> region() {
    std::optional<std::pair<int, int>> cell = region_of(current_word());
    if (!cell) return std::nullopt;
    ++pos_;
    // "north east" as two words
    if (cell->first == 1 && cell->second != 1) {
      if (const auto second = region_of(current_word()); second && second->second == 1 && second->first != 1) {
        cell->first = second->first;
        ++pos_;
      }
    }
    if (is_area_word(current_word())) ++pos_;
    if (word("of")) {
      ++pos_;
      if (word("the")) ++pos_;
      if (!(word("city") || word("map"))) fail("expected 'city' or 'map' after 'of'");
      ++pos_;
    }
    return Vec2{(cell->first + 0.5) * world_.extent_x() / 3.0, (cell->second + 0.5) * world_.extent_y() / 3.0};
  }

  Location hotspot(EntityKind kind) {
    Vec2 c;
    try {
      c = hotspot_centroid(world_, kind);
    } catch (const std::invalid_argument&) {
      fail("no " + std::string(kind == EntityKind::pedestrian ? "pedestrians" : "vehicles") + " in view");
    }
    return Location{snap(c), false};
  }

  Vec2 snap(Vec2 p) {
    if (p.x < 0.0 || p.y < 0.0 || p.x >= world_.extent_x() || p.y >= world_.extent_y())
      fail("place lies outside the map");
    if (!is_obstacle(world_, p)) return p;
    const auto free = world_.nearest_free_point(p);
    if (!free) fail("no free cell near the place");
    return *free;
  }

  const std::string& text_;
  std::vector<Token> toks_;
  const WorldMap& world_;
  const Lexicon& lexicon_;
  std::size_t pos_ = 0;
  std::size_t clause_ = 0;
};

}  // namespace

ParsedCommand parse_instruction(const Instruction& instr, const WorldMap& world, const Lexicon& lexicon) {
  return Parser(instr.text, world, lexicon).run();
}

// ---------------------------------------------------------------------------
// Canonical text and JSON

std::string format_draft(const TaskDraft& d) {
  std::string s = d.type == Role::patrol ? "patrol" : "track";
  s += " at (" + format_double(d.position.x) + ", " + format_double(d.position.y) + ") ";
  if (d.weight == kWeightHigh)
    s += "high priority";
  else if (d.weight == kWeightNormal)
    s += "normal priority";
  else if (d.weight == kWeightLow)
    s += "low priority";
  else
    s += "weight " + format_double(d.weight);
  s += " radius " + format_double(d.sigma);
  return s;
}

std::string format_command(const ParsedCommand& c) {
  std::string s;
  for (const TaskDraft& d : c.tasks) {
    if (!s.empty()) s += " and ";
    s += format_draft(d);
  }
  return s;
}

nlohmann::json to_json(const ParsedCommand& c) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const TaskDraft& d : c.tasks)
    tasks.push_back({{"x", d.position.x},
                     {"y", d.position.y},
                     {"w", d.weight},
                     {"sigma", d.sigma},
                     {"type", to_string(d.type)}});
  return {{"tasks", tasks}, {"confidence", to_string(c.confidence)}};
}

ParsedCommand parsed_command_from_json(const nlohmann::json& doc, const WorldMap& world, const std::string& text) {
  const auto bad = [&](const std::string& reason) { throw ParseError(text, reason); };
  if (!doc.is_object()) bad("parser output is not an object");
  for (const auto& [key, value] : doc.items())
    if (key != "tasks" && key != "confidence") bad("unexpected key '" + key + "'");
  if (!doc.contains("tasks") || !doc.at("tasks").is_array() || doc.at("tasks").empty())
    bad("parser output needs a non-empty 'tasks' array");
  ParsedCommand out;
  if (doc.contains("confidence")) {
    const auto& c = doc.at("confidence");
    if (c == "exact")
      out.confidence = Confidence::exact;
    else if (c == "fuzzy")
      out.confidence = Confidence::fuzzy;
    else
      bad("confidence must be 'exact' or 'fuzzy'");
  }
  std::size_t n = 0;
  for (const auto& t : doc.at("tasks")) {
    const std::string where = "tasks[" + std::to_string(n++) + "]";
    if (!t.is_object()) bad(where + " is not an object");
    for (const auto& [key, value] : t.items())
      if (key != "x" && key != "y" && key != "w" && key != "sigma" && key != "type")
        bad("unexpected key '" + key + "' in " + where);
    const auto num = [&](const char* key, std::optional<double> fallback) {
      if (!t.contains(key)) {
        if (!fallback) bad(where + " lacks '" + key + "'");
        return *fallback;
      }
      const auto& v = t.at(key);
      if (!v.is_number() || !std::isfinite(v.get<double>())) bad(where + "." + key + " is not a finite number");
      return v.get<double>();
    };
    TaskDraft d;
    d.position = {num("x", std::nullopt), num("y", std::nullopt)};
    d.weight = num("w", kWeightNormal);
    d.sigma = num("sigma", kDefaultSigma);
    if (!t.contains("type") || !t.at("type").is_string()) bad(where + " lacks a 'type' string");
    const auto role = role_from_string(t.at("type").get<std::string>());
    if (!role) bad(where + ".type must be patrol or tracking");
    d.type = *role;
    if (d.weight < 0.0) bad(where + ".w must not be negative");
    if (!(d.sigma > 0.0)) bad(where + ".sigma must be positive");
    if (d.position.x < 0.0 || d.position.y < 0.0 || d.position.x >= world.extent_x() ||
        d.position.y >= world.extent_y())
      bad(where + " position is outside the map");
    if (is_obstacle(world, d.position)) bad(where + " position is inside a building");
    out.tasks.push_back(d);
  }
  return out;
}

TaskTuple to_tuple(const TaskDraft& d) { return {d.position, d.weight, d.type}; }

Task to_task(const TaskDraft& d, int id) {
  Task t;
  t.id = id;
  t.position = d.position;
  t.weight = d.weight;
  t.sigma = d.sigma;
  t.type = d.type;
  return t;
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus " + path.string(), path.string());
  std::vector<CorpusEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(e.what(), where);
    }
    if (!j.contains("text") || !j.contains("tasks") || !j.at("tasks").is_array())
      throw ConfigError("corpus line needs 'text' and 'tasks'", where);
    CorpusEntry e{j.at("text").get<std::string>(), {}};
    for (const auto& t : j.at("tasks")) {
      const auto role = role_from_string(t.at("type").get<std::string>());
      if (!role) throw ConfigError("bad task type", where);
      e.gold.push_back({{t.at("x").get<double>(), t.at("y").get<double>()}, t.at("w").get<double>(), *role});
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CorpusResult> evaluate_corpus(CommandParser& parser, const WorldMap& world,
                                          const std::vector<CorpusEntry>& corpus) {
  std::vector<CorpusResult> out;
  out.reserve(corpus.size());
  for (const CorpusEntry& e : corpus) {
    CorpusResult r{e.gold, std::nullopt};
    try {
      const ParsedCommand c = parser.parse({e.text, 0}, world);
      std::vector<TaskTuple> parsed;
      for (const TaskDraft& d : c.tasks) parsed.push_back(to_tuple(d));
      r.parsed = std::move(parsed);
    } catch (const ParseError&) {
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace coordfield
