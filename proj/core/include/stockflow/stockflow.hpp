#pragma once

#include "stockflow/colimit.hpp"
#include "stockflow/decomposition.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"
#include "stockflow/flow_expr.hpp"
#include "stockflow/hierarchy.hpp"
#include "stockflow/io.hpp"
#include "stockflow/schema.hpp"
#include "stockflow/script.hpp"
#include "stockflow/simulate.hpp"
#include "stockflow/surgery.hpp"
#include "stockflow/updown.hpp"
