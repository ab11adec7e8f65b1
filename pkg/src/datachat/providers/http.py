"""Live HTTP+JSON adapters, configured from environment or settings.

The wire contract is deliberately plain: the model endpoint accepts the
structured prompt as JSON and returns ``{"value": <object>}``; the search
endpoint accepts ``{"query": ...}`` and returns ``{"items": [...]}``. No
vendor SDK is assumed.
"""

from __future__ import annotations

from typing import Any, Optional

import httpx

from ..errors import AdapterUnavailable, Timeout
from .core import SearchResultItem, StructuredPrompt


class HttpModelAdapter:
    def __init__(self, endpoint: str, api_key: str = "", timeout_s: float = 30.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self.endpoint = endpoint
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def complete(self, prompt: StructuredPrompt) -> Any:
        try:
            response = self._client.post(self.endpoint, json=prompt.to_dict())
            response.raise_for_status()
        except httpx.TimeoutException as exc:
            raise Timeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise AdapterUnavailable(str(exc)) from exc
        return response.json().get("value")


class HttpSearchAdapter:
    def __init__(self, endpoint: str, api_key: str = "", timeout_s: float = 30.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self.endpoint = endpoint
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def search(self, query: str) -> list[SearchResultItem]:
        try:
            response = self._client.post(self.endpoint, json={"query": query})
            response.raise_for_status()
        except httpx.TimeoutException as exc:
            raise Timeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise AdapterUnavailable(str(exc)) from exc
        items = response.json().get("items", [])
        return [
            SearchResultItem(query=query, title=i.get("title", ""),
                             url=i["url"], snippet=i.get("snippet", ""))
            for i in items
        ]
