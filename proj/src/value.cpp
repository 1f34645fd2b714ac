#include "loom/value.hpp"

#include <cstdint>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace loom {
namespace detail {

namespace {

struct Registry {
  std::mutex mtx;
  std::vector<TypeInfo> infos;  // index = tag id - 1
  std::unordered_map<std::type_index, TypeTag> by_type;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

TypeTag register_type_erased(std::type_index ti, TypeInfo info) {
  auto& r = registry();
  std::lock_guard lock(r.mtx);
  if (auto it = r.by_type.find(ti); it != r.by_type.end()) return it->second;
  r.infos.push_back(std::move(info));
  TypeTag tag(static_cast<std::uint32_t>(r.infos.size()));
  r.by_type.emplace(ti, tag);
  return tag;
}

std::optional<TypeTag> lookup_tag(std::type_index ti) {
  auto& r = registry();
  std::lock_guard lock(r.mtx);
  if (auto it = r.by_type.find(ti); it != r.by_type.end()) return it->second;
  return std::nullopt;
}

const TypeInfo& type_info(TypeTag tag) {
  auto& r = registry();
  std::lock_guard lock(r.mtx);
  if (!tag.valid() || tag.id() > r.infos.size())
    throw UnregisteredType("unknown type tag " + std::to_string(tag.id()));
  return r.infos[tag.id() - 1];
}

std::optional<TypeTag> lookup_tag_by_name(std::string_view name) {
  auto& r = registry();
  std::lock_guard lock(r.mtx);
  for (std::size_t i = 0; i < r.infos.size(); ++i)
    if (r.infos[i].name == name) return TypeTag(static_cast<std::uint32_t>(i + 1));
  return std::nullopt;
}

// Builtin element types.
const bool builtins_registered = [] {
  register_type<bool>("bool");
  register_type<std::int32_t>("int");
  register_type<std::int64_t>("int64");
  register_type<std::uint32_t>("uint32");
  register_type<std::uint64_t>("uint64");
  register_type<float>("float");
  register_type<double>("double");
  register_type<std::string>("string");
  register_type<Atom>("atom");
  return true;
}();

}  // namespace detail

bool Value::equals(const Value& other) const {
  if (tag_ != other.tag_) return false;
  if (!tag_.valid()) return true;
  return detail::type_info(tag_).equal(data_.get(), other.data_.get());
}

std::string Value::to_string() const {
  if (!tag_.valid()) return "<empty>";
  return detail::type_info(tag_).print(data_.get());
}

Value Value::clone_deep() const {
  if (!tag_.valid()) return {};
  return Value(tag_, detail::type_info(tag_).clone(data_.get()));
}

void* Value::raw_unique() {
  if (data_.use_count() > 1)
    data_ = detail::type_info(tag_).clone(data_.get());
  return data_.get();
}

}  // namespace loom
