#include <sstream>
#include <stdexcept>

#include "lvx/csv.hpp"
#include "lvx/wellposedness.hpp"

namespace lvx::wellposedness {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::undetermined:
      return "undetermined";
  }
  return "undetermined";
}

std::optional<double> ConditionItem::quantity(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q.value;
  return std::nullopt;
}

Verdict ConditionReport::overall() const {
  bool undetermined = false;
  for (const auto& it : items) {
    if (!it.counted) continue;
    if (it.verdict == Verdict::fail) return Verdict::fail;
    if (it.verdict == Verdict::undetermined) undetermined = true;
  }
  return undetermined ? Verdict::undetermined : Verdict::pass;
}

Verdict ConditionReport::group_verdict(const std::string& group) const {
  bool undetermined = false;
  bool any = false;
  for (const auto& it : items) {
    if (!it.counted || it.group != group) continue;
    any = true;
    if (it.verdict == Verdict::fail) return Verdict::fail;
    if (it.verdict == Verdict::undetermined) undetermined = true;
  }
  if (!any) throw std::invalid_argument("no condition in group " + group);
  return undetermined ? Verdict::undetermined : Verdict::pass;
}

const ConditionItem* ConditionReport::find(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return &it;
  return nullptr;
}

const ConditionItem* ConditionReport::first_failure() const {
  for (const auto& it : items)
    if (it.counted && it.verdict == Verdict::fail) return &it;
  for (const auto& it : items)
    if (it.counted && it.verdict == Verdict::undetermined) return &it;
  return nullptr;
}

std::string ConditionReport::text() const {
  std::ostringstream os;
  os << "checker: " << checker << "\n";
  os << "overall: " << to_string(overall()) << "\n";
  for (const auto& it : items) {
    os << "[" << to_string(it.verdict) << "] " << it.id << " (" << it.group << (it.counted ? "" : ", alternative")
       << "): " << it.description << "\n";
    for (const auto& q : it.quantities) os << "    " << q.name << " = " << csv::format(q.value) << "\n";
    if (!it.note.empty()) os << "    note: " << it.note << "\n";
  }
  if (size_lhs) os << "size condition left-hand side: " << csv::format(*size_lhs) << "\n";
  if (const auto* f = first_failure(); f && f->verdict == Verdict::fail)
    os << "first failing condition: " << f->id << "\n";
  return os.str();
}

void ConditionReport::write_csv(std::ostream& out) const {
  out << "checker,id,group,counted,verdict,quantities,note,description\n";
  for (const auto& it : items) {
    std::string qs;
    for (const auto& q : it.quantities) {
      if (!qs.empty()) qs += ';';
      qs += q.name + "=" + csv::format(q.value);
    }
    out << quote(checker) << ',' << quote(it.id) << ',' << quote(it.group) << ',' << (it.counted ? 1 : 0) << ','
        << to_string(it.verdict) << ',' << quote(qs) << ',' << quote(it.note) << ',' << quote(it.description)
        << '\n';
  }
  out << quote(checker) << ",overall,summary,1," << to_string(overall()) << ','
      << (size_lhs ? quote("size_lhs=" + csv::format(*size_lhs)) : std::string()) << ",,\n";
}

}  // namespace lvx::wellposedness
