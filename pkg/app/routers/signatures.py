from typing import Literal

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.signatures import builtin_canonical_set, builtin_paper_set

router = APIRouter(prefix="/signatures", tags=["signatures"])


class SignatureResponse(BaseModel):
    id: str
    name: str
    header: str = Field(description="Header bytes as hex")
    footer: str | None = Field(default=None, description="Footer bytes as hex, null if the type has none")
    max_file_size: int
    extension: str
    validator: str | None = None


class SignatureSetResponse(BaseModel):
    name: str
    max_component_length: int
    signatures: list[SignatureResponse]


@router.get("/{set_name}", response_model=SignatureSetResponse)
async def get_signature_set(set_name: Literal["paper", "canonical"]) -> SignatureSetResponse:
    """List a built-in signature set."""
    signature_set = builtin_canonical_set() if set_name == "canonical" else builtin_paper_set()
    return SignatureSetResponse(
        name=set_name,
        max_component_length=signature_set.max_component_length,
        signatures=[
            SignatureResponse(
                id=sig.id,
                name=sig.name,
                header=sig.header.hex(),
                footer=sig.footer.hex() if sig.footer is not None else None,
                max_file_size=sig.max_file_size,
                extension=sig.extension,
                validator=sig.validator,
            )
            for sig in signature_set
        ],
    )
