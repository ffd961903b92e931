#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace anmod {

/// Name → value map tagged with what it holds, so design points and
/// parameter vectors cannot be mixed up at call sites.
template <typename Tag>
class NamedValues {
public:
    using Map = std::map<std::string, double, std::less<>>;

    NamedValues() = default;
    NamedValues(std::initializer_list<typename Map::value_type> init) : values_(init) {}
    explicit NamedValues(Map values) : values_(std::move(values)) {}

    double at(std::string_view name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw std::out_of_range("no value for '" + std::string(name) + "'");
        return it->second;
    }
    bool contains(std::string_view name) const { return values_.find(name) != values_.end(); }
    void set(std::string_view name, double value) { values_.insert_or_assign(std::string(name), value); }
    double& operator[](const std::string& name) { return values_[name]; }

    const Map& map() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    bool operator==(const NamedValues&) const = default;

private:
    Map values_;
};

struct DesignTag {};
struct ParameterTag {};

using DesignPoint = NamedValues<DesignTag>;
using ParameterVector = NamedValues<ParameterTag>;

}  // namespace anmod
