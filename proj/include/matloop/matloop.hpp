#pragma once

// Everything at once.

#include "matloop/ast.hpp"
#include "matloop/circuit.hpp"
#include "matloop/desugar.hpp"
#include "matloop/error.hpp"
#include "matloop/evaluate.hpp"
#include "matloop/fragments.hpp"
#include "matloop/functions.hpp"
#include "matloop/instance.hpp"
#include "matloop/matrix.hpp"
#include "matloop/parser.hpp"
#include "matloop/relational.hpp"
#include "matloop/semiring.hpp"
#include "matloop/stdlib.hpp"
#include "matloop/translate.hpp"
#include "matloop/typecheck.hpp"
