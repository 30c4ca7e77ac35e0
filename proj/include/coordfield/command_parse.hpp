#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordfield/metrics.hpp"
#include "coordfield/task.hpp"
#include "coordfield/world.hpp"

namespace coordfield {

struct Instruction {
  std::string text;
  long issued_at = 0;
};

struct TaskDraft {
  Vec2 position;
  double weight = 3.0;
  double sigma = kDefaultSigma;
  Role type = Role::patrol;
  friend bool operator==(const TaskDraft&, const TaskDraft&) = default;
};

enum class Confidence : unsigned char { exact, fuzzy };
std::string_view to_string(Confidence c);

struct ParsedCommand {
  std::vector<TaskDraft> tasks;
  /// exact when every position was given as coordinates.
  Confidence confidence = Confidence::exact;
  friend bool operator==(const ParsedCommand&, const ParsedCommand&) = default;
};

/// The instruction could not be turned into tasks. `clause` is the part of
/// the text that failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string clause, std::string reason);
  const std::string& clause() const { return clause_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string clause_;
  std::string reason_;
};

inline constexpr double kWeightHigh = 5.0;
inline constexpr double kWeightNormal = 3.0;
inline constexpr double kWeightLow = 1.0;
/// Hotspot bins are this many world units on a side.
inline constexpr double kHotspotBin = 25.0;

/// Named places as boxes in world units: {"places": {"market square": [x0, y0, x1, y1]}}.
struct Lexicon {
  struct Place {
    std::vector<std::string> words;
    double x0, y0, x1, y1;
    Vec2 centre() const { return {(x0 + x1) / 2.0, (y0 + y1) / 2.0}; }
  };
  std::vector<Place> places;
};

Lexicon load_lexicon(const nlohmann::json& doc);
Lexicon load_lexicon_file(const std::filesystem::path& path);

/// Centroid of the densest cluster of entities of `kind`: the fullest
/// kHotspotBin bin (ties to the lower (y, x) bin), then the mean of the
/// entities in its 3x3 bin neighbourhood. Throws std::invalid_argument when
/// there are no such entities.
Vec2 hotspot_centroid(const WorldMap& world, EntityKind kind);

/// Grammar parser; see docs/grammar.md. Throws ParseError.
ParsedCommand parse_instruction(const Instruction& instr, const WorldMap& world, const Lexicon& lexicon);

/// Canonical text for one draft, e.g. "patrol at (300, 400) high priority radius 25".
std::string format_draft(const TaskDraft& d);
std::string format_command(const ParsedCommand& c);

nlohmann::json to_json(const ParsedCommand& c);
/// Strict validation of a parsed-command document against the world, the
/// same checks the grammar applies. Throws ParseError quoting `text`.
ParsedCommand parsed_command_from_json(const nlohmann::json& doc, const WorldMap& world, const std::string& text);

TaskTuple to_tuple(const TaskDraft& d);
Task to_task(const TaskDraft& d, int id = 0);

class CommandParser {
 public:
  virtual ~CommandParser() = default;
  virtual ParsedCommand parse(const Instruction& instr, const WorldMap& world) = 0;
};

class GrammarParser final : public CommandParser {
 public:
  explicit GrammarParser(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
  ParsedCommand parse(const Instruction& instr, const WorldMap& world) override {
    return parse_instruction(instr, world, lexicon_);
  }
  const Lexicon& lexicon() const { return lexicon_; }

 private:
  Lexicon lexicon_;
};

/// Runs `argv` once per instruction, writes {"text": ...} to its stdin and
/// reads a parsed-command document from its stdout.
class ExternalParser final : public CommandParser {
 public:
  explicit ExternalParser(std::vector<std::string> argv, int timeout_ms = 10000);
  ParsedCommand parse(const Instruction& instr, const WorldMap& world) override;

 private:
  std::vector<std::string> argv_;
  int timeout_ms_;
};

/// One line of the gold corpus: {"text": ..., "tasks": [{"x", "y", "w", "type"}]}.
struct CorpusEntry {
  std::string text;
  std::vector<TaskTuple> gold;
};

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);
std::vector<CorpusResult> evaluate_corpus(CommandParser& parser, const WorldMap& world,
                                          const std::vector<CorpusEntry>& corpus);

}  // namespace coordfield
