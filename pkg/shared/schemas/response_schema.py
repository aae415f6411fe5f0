from typing import Optional

from pydantic import BaseModel, ConfigDict


class CliResponse(BaseModel):
    """Envelope the CLI prints when a command fails"""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "success": False,
                "error": "ZeroEvidenceException",
                "message": "Evidence P(d) is zero; the posterior is undefined",
                "exit_code": 3
            }
        }
    )

    success: bool
    error: Optional[str] = None
    message: str
    exit_code: int = 0


def create_error_response(error: str, message: str = "Error occurred", exit_code: int = 2) -> CliResponse:
    """Create a standardized error response"""
    return CliResponse(
        success=False,
        error=error,
        message=message,
        exit_code=exit_code
    )
