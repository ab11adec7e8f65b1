from .core import (
    FIELD_KINDS,
    MAX_SNIPPET_LEN,
    TASK_TAGS,
    Clock,
    ModelAdapter,
    Providers,
    SchemaField,
    SearchAdapter,
    SearchResultItem,
    StructuredPrompt,
    SystemClock,
    complete_structured,
    invoke_with_repair,
    normalize_query,
    prompt,
    search,
    validate_structured,
)
from .stubs import (
    DirectoryModelAdapter,
    DirectorySearchAdapter,
    StubClock,
    StubModelAdapter,
    StubSearchAdapter,
    fixture_key,
)

__all__ = [
    "FIELD_KINDS", "MAX_SNIPPET_LEN", "TASK_TAGS",
    "Clock", "ModelAdapter", "Providers", "SchemaField", "SearchAdapter",
    "SearchResultItem", "StructuredPrompt", "SystemClock",
    "complete_structured", "invoke_with_repair", "normalize_query", "prompt",
    "search", "validate_structured",
    "DirectoryModelAdapter", "DirectorySearchAdapter", "StubClock",
    "StubModelAdapter", "StubSearchAdapter", "fixture_key",
]
