from rest_framework.exceptions import ErrorDetail

__all__ = ["first_error"]


def first_error(errors, parent_key=''):
    """
    Flatten a serializer's `errors` into (dotted_key, message) for the first
    problem found, so config failures read `train.gamma: ...`.
    """
    for key, value in errors.items():
        dotted = f"{parent_key}.{key}" if parent_key else str(key)
        if key == 'non_field_errors':
            dotted = parent_key or key

        if isinstance(value, dict):
            nested = first_error(value, parent_key=dotted)
            if nested:
                return nested

        elif isinstance(value, list):
            for error in value:
                if isinstance(error, dict):
                    nested = first_error(error, parent_key=dotted)
                    if nested:
                        return nested
                elif isinstance(error, ErrorDetail) and error.code == 'required':
                    return dotted, "This field is required."
                else:
                    return dotted, str(error)

        elif isinstance(value, str):
            return dotted, value
    return None
