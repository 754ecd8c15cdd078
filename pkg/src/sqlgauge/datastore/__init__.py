from .catalog import (Catalog, CatalogError, ColumnInfo, DatabaseRef,
                      ForeignKey, SchemaInfo, TableInfo, introspect_schema)
from .executor import (DEFAULT_ROW_CAP, DEFAULT_TIMEOUT_MS, DbConnectError,
                       ExecError, QueryTimeout, ResultTable, TimingStats,
                       execute_query, measure_time, query_is_ordered)
from .scaling import (CapacityError, CyclicFkError, ScalingError,
                      ensure_scaled, fk_topological_order, scale_database,
                      scaled_db_path)

__all__ = [
    "Catalog", "CatalogError", "ColumnInfo", "DatabaseRef", "ForeignKey",
    "SchemaInfo", "TableInfo", "introspect_schema",
    "DEFAULT_ROW_CAP", "DEFAULT_TIMEOUT_MS", "DbConnectError", "ExecError",
    "QueryTimeout", "ResultTable", "TimingStats", "execute_query",
    "measure_time", "query_is_ordered",
    "CapacityError", "CyclicFkError", "ScalingError", "ensure_scaled",
    "fk_topological_order", "scale_database", "scaled_db_path",
]
