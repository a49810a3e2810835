#pragma once

#include <stdexcept>
#include <string>

namespace cocy {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what);
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define COCY_DECLARE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    };

COCY_DECLARE_ERROR(FamilyViolation)
COCY_DECLARE_ERROR(OverflowEscape)
COCY_DECLARE_ERROR(NotSaddleConservative)
COCY_DECLARE_ERROR(DegenerateDirections)
COCY_DECLARE_ERROR(NotOnePoint)
COCY_DECLARE_ERROR(DegenerateGap)
COCY_DECLARE_ERROR(BudgetExceeded)
COCY_DECLARE_ERROR(StepTooCoarse)
COCY_DECLARE_ERROR(FlowboxOverlap)
COCY_DECLARE_ERROR(ConfigError)
COCY_DECLARE_ERROR(InvalidArgument)

#undef COCY_DECLARE_ERROR

}  // namespace cocy
